#include "rcm/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

rcm::Json load_json(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    rcm::Json j;
    in >> j;
    return j;
}

struct CommonFlags {
    std::string config_file;
    std::string out_dir;
    std::vector<std::uint64_t> seeds;
    int mesh_exp = -1;
    int levy_level = -2;
    int window = -1;
    int tail_depth = -1;
    double tol = -1.0;
    double hurst = -1.0;
    int dim = -1;
    double horizon = -1.0;
    double cs = -1.0;
    std::string matrix_file;
    std::string chart_file;
    int steps = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_file, "experiment config JSON");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--seed,--seeds", f.seeds, "seed list");
    cmd->add_option("--mesh", f.mesh_exp, "mesh exponent k (mesh = 2^-k)");
    cmd->add_option("--levy-level", f.levy_level, "dyadic depth of the second-level lift");
    cmd->add_option("--window", f.window, "fiber window size N");
    cmd->add_option("--tail-depth", f.tail_depth, "stable-sum truncation depth");
    cmd->add_option("--tol", f.tol, "tolerance");
    cmd->add_option("--hurst", f.hurst, "Hurst parameter");
    cmd->add_option("--dim", f.dim, "noise dimension");
    cmd->add_option("--horizon", f.horizon, "two-sided horizon L");
    cmd->add_option("--cs", f.cs, "C_S override");
    cmd->add_option("--steps", f.steps, "invariance steps");
}

rcm::ExperimentConfig build_config(const CommonFlags& f) {
    rcm::ExperimentConfig c;
    if (!f.config_file.empty()) c = rcm::parse_config(load_json(f.config_file));
    if (!f.chart_file.empty()) {
        const rcm::Json chart = load_json(f.chart_file);
        c = rcm::parse_config(chart.at("config"));
        if (chart.contains("xi_c")) {
            const auto v = chart.at("xi_c").get<std::vector<double>>();
            c.xi = Eigen::Map<const rcm::Vec>(v.data(), static_cast<int>(v.size()));
        }
    }
    if (!f.matrix_file.empty()) {
        const rcm::Json m = load_json(f.matrix_file);
        const auto& a = m.contains("A") ? m.at("A") : m;
        const int n = static_cast<int>(a.size());
        rcm::Mat A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                A(i, j) = a[static_cast<size_t>(i)][static_cast<size_t>(j)].get<double>();
        c.inline_A = A;
        c.system.clear();
    }
    if (!f.out_dir.empty()) c.out_dir = f.out_dir;
    if (!f.seeds.empty()) c.noise.seeds = f.seeds;
    if (f.mesh_exp >= 0) c.noise.mesh_exp = f.mesh_exp;
    if (f.levy_level >= -1) c.noise.levy_level = f.levy_level;
    if (f.window >= 1) c.lp.window = f.window;
    if (f.tail_depth >= 1) c.lp.tail_depth = f.tail_depth;
    if (f.tol > 0.0) {
        c.solver.tolerance = f.tol;
        c.lp.tol = f.tol;
    }
    if (f.hurst > 0.0) c.noise.hurst = f.hurst;
    if (f.dim >= 1) c.noise.dim = f.dim;
    if (f.horizon > 0.0) c.noise.horizon = f.horizon;
    if (f.cs > 0.0) c.cs = f.cs;
    if (f.steps >= 1) c.steps = f.steps;
    return c;
}

int emit(const rcm::ExperimentConfig& c, const rcm::RunRecord& rec) {
    std::ofstream out(std::filesystem::path(c.out_dir) / "run_record.json");
    out << rec.to_json().dump(2) << "\n";
    std::cout << rec.to_json().dump(2) << std::endl;
    return rec.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rough-manifold: rough-path lifts, RDE solves and center-manifold charts"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* sample = app.add_subcommand("sample-fbm", "sample fractional Brownian paths");
    auto* lift = app.add_subcommand("lift", "dyadic second-level lift plus Chen diagnostics");
    auto* solve = app.add_subcommand("solve-rde", "fixed-point solve of the RDE");
    auto* manifold = app.add_subcommand("center-manifold", "discrete Lyapunov-Perron chart");
    auto* invariance = app.add_subcommand("verify-invariance", "flow-and-recompute invariance check");
    auto* gap = app.add_subcommand("gap-check", "dichotomy constants and gap budget");
    auto* cocycle = app.add_subcommand("cocycle-check", "solution cocycle identity");
    for (auto* cmd : {sample, lift, solve, manifold, invariance, gap, cocycle})
        add_common(cmd, flags);
    gap->add_option("--matrix", flags.matrix_file, "JSON file with the matrix A");
    invariance->add_option("--chart", flags.chart_file, "chart JSON from center-manifold");

    CLI11_PARSE(app, argc, argv);

    try {
        const rcm::ExperimentConfig c = build_config(flags);
        rcm::RunRecord rec;
        if (sample->parsed()) rec = rcm::run_sample_fbm(c);
        else if (lift->parsed()) rec = rcm::run_lift(c);
        else if (solve->parsed()) rec = rcm::run_solve_rde(c);
        else if (manifold->parsed()) rec = rcm::run_center_manifold(c);
        else if (invariance->parsed()) rec = rcm::run_verify_invariance(c);
        else if (gap->parsed()) rec = rcm::run_gap_check(c);
        else if (cocycle->parsed()) rec = rcm::run_cocycle_check(c);
        return emit(c, rec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
