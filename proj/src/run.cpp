#include "rcm/run.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace rcm {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument(std::string("config: unknown key '") + it.key() + "' in " +
                                        where);
    }
}

Json vec_to_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json mat_to_json(const Mat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json r = Json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

Mat mat_from_json(const Json& j) {
    const int r = static_cast<int>(j.size());
    const int c = r > 0 ? static_cast<int>(j[0].size()) : 0;
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) m(i, k) = j[static_cast<size_t>(i)][static_cast<size_t>(k)];
    return m;
}

} // namespace

ExperimentConfig parse_config(const Json& j) {
    check_keys(j,
               {"version", "system", "inline", "alpha", "noise", "solver", "lp", "xi", "t", "tau",
                "steps", "cs", "trichotomy", "out"},
               "top level");
    if (!j.contains("version") || j.at("version").get<int>() != 1)
        throw std::invalid_argument("config: missing or unsupported version (expect 1)");
    ExperimentConfig c;
    if (j.contains("system")) c.system = j.at("system").get<std::string>();
    if (j.contains("inline")) {
        const Json& in = j.at("inline");
        check_keys(in, {"A", "F", "G"}, "inline");
        c.inline_A = mat_from_json(in.at("A"));
        if (in.contains("F")) c.inline_F = in.at("F").get<std::string>();
        if (in.contains("G")) c.inline_G = in.at("G").get<std::string>();
    }
    if (c.system.empty() && c.inline_A.rows() == 0)
        throw std::invalid_argument("config: need a system name or an inline spec");
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("noise")) {
        const Json& n = j.at("noise");
        check_keys(n, {"hurst", "dim", "seeds", "seed", "horizon", "mesh_exp", "levy_level", "zero"},
                   "noise");
        if (n.contains("hurst")) c.noise.hurst = n.at("hurst").get<double>();
        if (n.contains("dim")) c.noise.dim = n.at("dim").get<int>();
        if (n.contains("seeds")) c.noise.seeds = n.at("seeds").get<std::vector<std::uint64_t>>();
        if (n.contains("seed")) c.noise.seeds = {n.at("seed").get<std::uint64_t>()};
        if (n.contains("horizon")) c.noise.horizon = n.at("horizon").get<double>();
        if (n.contains("mesh_exp")) c.noise.mesh_exp = n.at("mesh_exp").get<int>();
        if (n.contains("levy_level")) c.noise.levy_level = n.at("levy_level").get<int>();
        if (n.contains("zero")) c.noise.deterministic_zero = n.at("zero").get<bool>();
        if (c.noise.seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    }
    if (j.contains("solver")) {
        const Json& s = j.at("solver");
        check_keys(s, {"tol", "max_iterations", "min_cells", "contraction_threshold", "quadrature"},
                   "solver");
        if (s.contains("tol")) c.solver.tolerance = s.at("tol").get<double>();
        if (s.contains("max_iterations")) c.solver.max_iterations = s.at("max_iterations").get<int>();
        if (s.contains("min_cells")) c.solver.min_cells = s.at("min_cells").get<int>();
        if (s.contains("contraction_threshold"))
            c.solver.contraction_threshold = s.at("contraction_threshold").get<double>();
        if (s.contains("quadrature"))
            c.solver.quadrature =
                s.at("quadrature").get<std::string>() == "trapezoid" ? QuadRule::Trapezoid
                                                                     : QuadRule::Left;
    }
    if (j.contains("lp")) {
        const Json& l = j.at("lp");
        check_keys(l, {"window", "tail_depth", "eta", "K", "tol", "max_iterations", "R", "tempered"},
                   "lp");

        if (l.contains("window")) c.lp.window = l.at("window").get<int>();
        if (l.contains("tail_depth")) c.lp.tail_depth = l.at("tail_depth").get<int>();
        if (l.contains("tol")) c.lp.tol = l.at("tol").get<double>();
        if (l.contains("max_iterations")) c.lp.max_iterations = l.at("max_iterations").get<int>();
        if (l.contains("eta")) c.lp_eta = l.at("eta").get<double>();
        if (l.contains("K")) c.lp_K = l.at("K").get<double>();
        if (l.contains("R")) {
            c.lp.truncation.kind = TruncationPolicy::Kind::Fixed;
            c.lp.truncation.R = l.at("R").get<double>();
        }
        if (l.contains("tempered") && l.at("tempered").get<bool>())
            c.lp.truncation.kind = TruncationPolicy::Kind::Tempered;
    }
    if (j.contains("xi")) {
        const auto v = j.at("xi").get<std::vector<double>>();
        c.xi = Eigen::Map<const Vec>(v.data(), static_cast<int>(v.size()));
    }
    if (j.contains("t")) c.t = j.at("t").get<double>();
    if (j.contains("tau")) c.tau = j.at("tau").get<double>();
    if (j.contains("steps")) c.steps = j.at("steps").get<int>();
    if (j.contains("cs")) c.cs = j.at("cs").get<double>();
    if (j.contains("trichotomy")) c.trichotomy = j.at("trichotomy").get<bool>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    return c;
}

Json config_to_json(const ExperimentConfig& c) {
    Json j;
    j["version"] = 1;
    if (!c.system.empty()) j["system"] = c.system;
    if (c.inline_A.rows() > 0)
        j["inline"] = Json{{"A", mat_to_json(c.inline_A)}, {"F", c.inline_F}, {"G", c.inline_G}};
    j["alpha"] = c.alpha;
    j["noise"] = Json{{"hurst", c.noise.hurst},
                      {"dim", c.noise.dim},
                      {"seeds", c.noise.seeds},
                      {"horizon", c.noise.horizon},
                      {"mesh_exp", c.noise.mesh_exp},
                      {"levy_level", c.noise.levy_level},
                      {"zero", c.noise.deterministic_zero}};
    j["solver"] = Json{{"tol", c.solver.tolerance},
                       {"max_iterations", c.solver.max_iterations},
                       {"min_cells", c.solver.min_cells},
                       {"contraction_threshold", c.solver.contraction_threshold},
                       {"quadrature", c.solver.quadrature == QuadRule::Trapezoid ? "trapezoid" : "left"}};
    j["lp"] = Json{{"window", c.lp.window},
                   {"tail_depth", c.lp.tail_depth},
                   {"tol", c.lp.tol},
                   {"max_iterations", c.lp.max_iterations},
                   {"R", c.lp.truncation.R},
                   {"tempered", c.lp.truncation.kind == TruncationPolicy::Kind::Tempered}};
    if (c.lp_eta) j["lp"]["eta"] = *c.lp_eta;
    if (c.lp_K) j["lp"]["K"] = *c.lp_K;
    if (c.xi.size() > 0) j["xi"] = vec_to_json(c.xi);
    j["t"] = c.t;
    j["tau"] = c.tau;
    j["steps"] = c.steps;
    j["cs"] = c.cs;
    j["out"] = c.out_dir;
    return j;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string dump = config_to_json(c).dump();
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

Json RunRecord::to_json() const {
    Json j;
    j["config_hash"] = config_hash;
    j["constants"] = constants;
    j["diagnostics"] = diagnostics;
    j["artifacts"] = artifacts;
    j["exit_code"] = exit_code;
    return j;
}

Json rough_path_to_json(const RoughPath& rp) {
    Json j;
    j["alpha"] = rp.alpha;
    j["grid"] = rp.grid().points();
    Json w = Json::array();
    for (int i = 0; i < rp.size(); ++i) {
        Json row = Json::array();
        for (int c = 0; c < rp.dim(); ++c) row.push_back(rp.first.values(i, c));
        w.push_back(std::move(row));
    }
    j["W"] = std::move(w);
    // Flattened upper-triangular d x d blocks in pair-major order.
    const std::int64_t total = rp.second.pair_count() * rp.second.entry_size();
    Json ww = Json::array();
    for (std::int64_t k = 0; k < total; ++k) ww.push_back(rp.second.data()[k]);
    j["WW"] = std::move(ww);
    return j;
}

RoughPath rough_path_from_json(const Json& j) {
    RoughPath rp;
    rp.alpha = j.at("alpha").get<double>();
    const auto pts = j.at("grid").get<std::vector<double>>();
    const auto& w = j.at("W");
    const int n = static_cast<int>(w.size());
    const int d = n > 0 ? static_cast<int>(w[0].size()) : 0;
    RowMat vals(n, d);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c) vals(i, c) = w[static_cast<size_t>(i)][static_cast<size_t>(c)];
    rp.first = SampledPath(TimeGrid(pts), std::move(vals));
    rp.second = TwoParamField(rp.first.grid, d, d);
    const auto& ww = j.at("WW");
    const std::int64_t total = rp.second.pair_count() * rp.second.entry_size();
    if (static_cast<std::int64_t>(ww.size()) != total)
        throw std::invalid_argument("rough_path_from_json: WW length mismatch");
    for (std::int64_t k = 0; k < total; ++k) rp.second.data()[k] = ww[static_cast<size_t>(k)];
    return rp;
}

Json splitting_to_json(const Splitting& s) {
    Json j;
    j["Pc"] = mat_to_json(s.center.P);
    j["Ps"] = mat_to_json(s.stable.P);
    if (!s.unstable.empty()) j["Pu"] = mat_to_json(s.unstable.P);
    j["Ac"] = mat_to_json(s.center.Ar);
    j["As"] = mat_to_json(s.stable.Ar);
    if (!s.unstable.empty()) j["Au"] = mat_to_json(s.unstable.Ar);
    j["Mc"] = s.Mc;
    j["Ms"] = s.Ms;
    j["gamma"] = s.gamma;
    j["beta"] = s.beta;
    if (s.trichotomy) {
        j["Mu"] = s.Mu;
        j["rho1"] = s.rho1;
        j["rho2"] = s.rho2;
        j["rho3"] = s.rho3;
    }
    j["center_tol"] = s.center_tol;
    return j;
}

TestSystem resolve_system(const ExperimentConfig& c) {
    if (!c.system.empty()) return make_system(c.system);
    TestSystem sys;
    sys.name = "inline";
    sys.A = LinearPart(c.inline_A);
    sys.state_dim = sys.A.dim();
    sys.noise_dim = c.noise.dim;
    auto coeff = [&](const std::string& key, bool diffusion) -> SmoothCoefficient {
        if (key == "zero")
            return SmoothCoefficient::zero(sys.state_dim, sys.state_dim,
                                           diffusion ? sys.noise_dim : 1);
        if (key == "det-oracle") return det_oracle_drift();
        if (key.rfind("cubic:", 0) == 0)
            return cubic_saturated_diffusion(sys.state_dim, sys.noise_dim,
                                             std::stod(key.substr(6)));
        throw std::invalid_argument("config: unknown coefficient key '" + key + "'");
    };
    sys.F = coeff(c.inline_F, false);
    sys.G = coeff(c.inline_G, true);
    return sys;
}

namespace {

SampledPath noise_on_grid(const NoiseSpec& n, std::uint64_t seed, TimeGrid grid) {
    if (n.deterministic_zero) return SampledPath(grid, RowMat::Zero(grid.size(), n.dim));
    FbmSpec spec;
    spec.hurst = n.hurst;
    spec.dimension = n.dim;
    spec.seed = seed;
    spec.grid = std::move(grid);
    return sample_fbm(spec);
}

} // namespace

SampledPath make_noise_path(const NoiseSpec& n, std::uint64_t seed) {
    const int per_unit = 1 << n.mesh_exp;
    const int steps = static_cast<int>(std::llround(2.0 * n.horizon * per_unit));
    return noise_on_grid(n, seed, make_uniform_grid(steps + 1, -n.horizon, n.horizon));
}

SampledPath make_noise_path_span(const NoiseSpec& n, std::uint64_t seed, int left, int right) {
    const int per_unit = 1 << n.mesh_exp;
    const int steps = (right - left) * per_unit;
    return noise_on_grid(n, seed, make_uniform_grid(steps + 1, static_cast<double>(left),
                                                    static_cast<double>(right)));
}

int max_threads() {
    const char* env = std::getenv("ROUGH_MANIFOLD_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    return v >= 1 ? v : 1;
}

namespace {

// Seed/fiber fan-out capped by ROUGH_MANIFOLD_THREADS; work items own their
// output slots, so there is no shared mutable state.
template <typename Fn>
void fan_out(int n, Fn&& fn) {
    const int threads = std::min(max_threads(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            int i;
            while ((i = next.fetch_add(1)) < n) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

namespace {

namespace fs = std::filesystem;

std::string out_path(const ExperimentConfig& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

} // namespace

RunRecord run_sample_fbm(const ExperimentConfig& c) {
    RunRecord rec;
    rec.config_hash = rcm::config_hash(c);
    const int n = static_cast<int>(c.noise.seeds.size());
    std::vector<Json> per_seed(static_cast<size_t>(n));
    std::vector<std::string> files(static_cast<size_t>(n));
    fan_out(n, [&](int k) {
        const std::uint64_t seed = c.noise.seeds[static_cast<size_t>(k)];
        const SampledPath path = make_noise_path(c.noise, seed);
        files[static_cast<size_t>(k)] = out_path(c, "fbm_seed" + std::to_string(seed) + ".csv");
        write_csv(path, files[static_cast<size_t>(k)]);
        per_seed[static_cast<size_t>(k)] = Json{{"seed", seed},
                                                {"b0", path.eval_linear(0.0).norm()},
                                                {"holder_alpha", holder_seminorm(path, c.alpha)}};
    });
    rec.artifacts = std::move(files);
    rec.diagnostics["seeds"] = per_seed;
    return rec;
}

RunRecord run_lift(const ExperimentConfig& c) {
    RunRecord rec;
    rec.config_hash = rcm::config_hash(c);
    const int n = static_cast<int>(c.noise.seeds.size());
    std::vector<Json> per_seed(static_cast<size_t>(n));
    std::vector<std::string> files(static_cast<size_t>(n));
    std::atomic<bool> all_pass{true};
    fan_out(n, [&](int k) {
        const std::uint64_t seed = c.noise.seeds[static_cast<size_t>(k)];
        const SampledPath path = make_noise_path(c.noise, seed);
        RoughPath rp;
        if (c.noise.levy_level >= 0)
            rp = levy_area_dyadic(path, c.noise.levy_level, c.alpha);
        else
            rp = lift_smooth(path, c.alpha);
        const double scale = std::max(1.0, sup_norm(rp.first));
        const ChenReport chen = check_chen(rp, rp.chen_tol * scale * scale,
                                           rp.size() > 512 ? TriplePolicy::Spanning
                                                           : TriplePolicy::AllTriples);
        if (!chen.pass) all_pass = false;
        files[static_cast<size_t>(k)] = out_path(c, "lift_seed" + std::to_string(seed) + ".json");
        write_json(files[static_cast<size_t>(k)], rough_path_to_json(rp));
        per_seed[static_cast<size_t>(k)] = Json{{"seed", seed},
                                                {"chen_residual", chen.max_residual},
                                                {"chen_pass", chen.pass},
                                                {"holder_first", rp.holder_first()},
                                                {"holder_second", rp.holder_second()}};
    });
    rec.artifacts = std::move(files);
    rec.diagnostics["seeds"] = per_seed;
    if (!all_pass) rec.exit_code = 2;
    return rec;
}

RunRecord run_solve_rde(const ExperimentConfig& c) {
    RunRecord rec;
    rec.config_hash = rcm::config_hash(c);
    const TestSystem sys = resolve_system(c);
    const Vec xi = c.xi.size() == sys.state_dim ? c.xi : Vec::Zero(sys.state_dim);
    Json per_seed = Json::array();
    for (std::uint64_t seed : c.noise.seeds) {
        NoiseSpec noise_spec = c.noise;
        noise_spec.dim = sys.noise_dim;
        const SampledPath noise = make_noise_path(noise_spec, seed);
        // Lift only the [0, horizon] window the solve runs on.
        const SampledPath seg = restrict_path(noise, 0.0, c.noise.horizon);
        const RoughPath window = lift_smooth(seg, c.alpha);
        RdeSolution sol;
        if (c.lp.truncation.kind == TruncationPolicy::Kind::Fixed) {
            const CutoffFunction f;
            sol = solve_rde_truncated(sys.A, sys.F, sys.G, xi, window, c.lp.truncation.R, f,
                                      c.solver);
        } else if (c.lp.truncation.kind == TruncationPolicy::Kind::Tempered) {
            const CutoffFunction f;
            const double K = c.lp_K.value_or(0.05);
            const double R = tempered_radius(K, 1.0, 1.0, window.holder_first(),
                                             window.holder_second());
            sol = solve_rde_truncated(sys.A, sys.F, sys.G, xi, window, R, f, c.solver);
        } else {
            sol = solve_rde(sys.A, sys.F, sys.G, xi, window, c.solver);
        }
        // The residual is graded against the plain mild equation, so it is a
        // diagnostic gate only when the cut-off stayed inert.
        const double resid = mild_residual(sys.A, sys.F, sys.G, xi, window, sol.u,
                                           c.solver.quadrature);
        const bool plain = c.lp.truncation.kind == TruncationPolicy::Kind::None ||
                           sol.truncation_scale == 1.0;
        const std::string file = out_path(c, "trajectory_seed" + std::to_string(seed) + ".csv");
        write_csv(sol.u.y, file);
        rec.artifacts.push_back(file);
        per_seed.push_back(Json{{"seed", seed},
                                {"iterations", sol.iterations},
                                {"contraction_factor", sol.contraction_factor},
                                {"mild_residual", resid},
                                {"truncation_scale", sol.truncation_scale},
                                {"subintervals", sol.subintervals.size()},
                                {"final_residual", sol.residuals.empty() ? 0.0 : sol.residuals.back()}});
        if (plain && resid > 10.0 * c.solver.tolerance) rec.exit_code = 2;
    }
    rec.diagnostics["seeds"] = std::move(per_seed);
    return rec;
}

namespace {

Json chart_to_json(const ExperimentConfig& c, const ManifoldChart& chart,
                   const std::vector<std::pair<double, Vec>>& samples) {
    Json j;
    j["config"] = config_to_json(c);
    j["xi_c"] = vec_to_json(chart.xi_c);
    j["hc"] = vec_to_json(chart.hc);
    j["rho"] = chart.rho;
    j["L_gamma"] = chart.L_gamma;
    j["contraction_factor"] = chart.contraction_factor;
    j["tail_bound"] = chart.tail_bound;
    j["iterations"] = chart.iterations;
    j["endpoint_mismatch"] = chart.endpoint_mismatch;
    j["center_recovery_error"] = chart.center_recovery_error;
    j["outside_ball"] = chart.outside_ball;
    Json samp = Json::array();
    for (const auto& [x, h] : samples) samp.push_back(Json{{"x", x}, {"hc", vec_to_json(h)}});
    j["graph_samples"] = std::move(samp);
    return j;
}

struct LpSetup {
    TestSystem sys;
    Splitting split;
    GapConstants gap;
    double C_S = 1.0;
    std::shared_ptr<const LpProblem> problem;
};

LpSetup make_lp_setup(const ExperimentConfig& c, std::uint64_t seed, int extra_right) {
    LpSetup s;
    s.sys = resolve_system(c);
    Splitting split = spectral_split(s.sys.A);
    split = dichotomy_constants(split, s.sys.A);
    s.split = split;
    s.C_S = c.cs > 0.0 ? c.cs : group_holder_constant(s.sys.A.A, c.alpha);
    GapConstants gap = gap_constant(split, s.C_S, c.lp_eta, c.lp_K);
    LpConfig lp = c.lp;
    lp.gap = gap;
    if (lp.truncation.kind == TruncationPolicy::Kind::Tempered && lp.truncation.K <= 0.0)
        lp.truncation.K = gap.K;
    lp.levy_level = c.noise.levy_level;
    NoiseSpec noise = c.noise;
    noise.dim = s.sys.noise_dim;
    SampledPath path = make_noise_path_span(noise, seed, -lp.window, extra_right);
    s.problem = std::make_shared<LpProblem>(std::move(path), c.alpha, split, s.sys.F, s.sys.G, lp);
    return s;
}

} // namespace

RunRecord run_center_manifold(const ExperimentConfig& c) {
    RunRecord rec;
    rec.config_hash = rcm::config_hash(c);
    const LpSetup setup = make_lp_setup(c, c.noise.seeds.front(), 2);
    const int n = setup.split.dim();
    const Vec anchor = c.xi.size() == n ? Vec(setup.split.center.P * c.xi) : Vec(Vec::Zero(n));
    const ManifoldChart chart = lp_fixed_point(setup.problem, anchor);
    // Sample the graph along the leading center direction.
    std::vector<std::pair<double, Vec>> samples;
    const Vec dir = setup.split.center.V.col(0);
    for (double x : {-0.1, -0.05, -0.02, -0.01, 0.0, 0.01, 0.02, 0.05, 0.1})
        samples.emplace_back(x, manifold_graph(chart, Vec(x * dir)));
    const std::string file = out_path(c, "chart.json");
    write_json(file, chart_to_json(c, chart, samples));
    rec.artifacts.push_back(file);
    rec.constants = Json{{"C_S", setup.C_S},
                         {"K", setup.problem->config().gap.K},
                         {"eta", setup.problem->config().gap.eta},
                         {"gap_lhs", setup.problem->config().gap.gap_lhs},
                         {"Mc", setup.split.Mc},
                         {"Ms", setup.split.Ms},
                         {"gamma", setup.split.gamma},
                         {"beta", setup.split.beta},
                         {"R_fiber0", setup.problem->fiber_radius(0)},
                         {"rho", chart.rho}};
    rec.diagnostics = Json{{"contraction_factor", chart.contraction_factor},
                           {"iterations", chart.iterations},
                           {"tail_bound", chart.tail_bound},
                           {"endpoint_mismatch", chart.endpoint_mismatch},
                           {"center_recovery_error", chart.center_recovery_error},
                           {"hc_at_zero", manifold_graph(chart, Vec::Zero(n)).norm()}};
    if (chart.contraction_factor >= 1.0 ||
        rec.diagnostics["hc_at_zero"].get<double>() > 1e-10)
        rec.exit_code = 2;
    return rec;
}

RunRecord run_verify_invariance(const ExperimentConfig& c) {
    RunRecord rec;
    rec.config_hash = rcm::config_hash(c);
    const LpSetup setup = make_lp_setup(c, c.noise.seeds.front(), c.steps + 1);
    const int n = setup.split.dim();
    const Vec anchor = c.xi.size() == n ? Vec(setup.split.center.P * c.xi) : Vec(Vec::Zero(n));
    const ManifoldChart chart = lp_fixed_point(setup.problem, anchor);
    const double tol = c.lp.tol > 0 ? std::max(1e-6, 1e3 * c.lp.tol) : 1e-6;
    const InvarianceReport rep = verify_invariance(chart, c.steps, tol, c.solver);
    Json steps = Json::array();
    for (const auto& st : rep.steps)
        steps.push_back(Json{{"gap", st.gap}, {"ball_exit", st.ball_exit}});
    rec.diagnostics = Json{{"max_gap", rep.max_gap}, {"pass", rep.pass}, {"steps", std::move(steps)}};
    const std::string file = out_path(c, "invariance.json");
    write_json(file, rec.diagnostics);
    rec.artifacts.push_back(file);
    if (!rep.pass) rec.exit_code = 2;
    return rec;
}

RunRecord run_gap_check(const ExperimentConfig& c) {
    RunRecord rec;
    rec.config_hash = rcm::config_hash(c);
    const TestSystem sys = resolve_system(c);
    Splitting split =
        spectral_split(sys.A, 1e-8, c.trichotomy ? SplitMode::Trichotomy : SplitMode::Dichotomy);
    split = dichotomy_constants(split, sys.A);
    const double C_S = c.cs > 0.0 ? c.cs : group_holder_constant(sys.A.A, c.alpha);
    rec.constants = Json{{"C_S", C_S},     {"Mc", split.Mc},       {"Ms", split.Ms},
                         {"gamma", split.gamma}, {"beta", split.beta}};
    if (c.trichotomy) {
        const TrichotomyGapConstants tri = trichotomy_gap_constant(split, C_S);
        rec.constants["trichotomy"] =
            Json{{"K", tri.K},       {"eta", tri.eta},   {"gap_lhs", tri.gap_lhs},
                 {"rho1", tri.rho1}, {"rho2", tri.rho2}, {"rho3", tri.rho3},
                 {"valid", tri.valid}};
    } else {
        const GapConstants gap = gap_constant(split, C_S, c.lp_eta, c.lp_K);
        rec.constants["K"] = gap.K;
        rec.constants["eta"] = gap.eta;
        rec.constants["gap_lhs"] = gap.gap_lhs;
        rec.constants["valid"] = gap.valid;
    }
    rec.diagnostics["splitting"] = splitting_to_json(split);
    const std::string file = out_path(c, "gap.json");
    write_json(file, rec.to_json());
    rec.artifacts.push_back(file);
    return rec;
}

RunRecord run_cocycle_check(const ExperimentConfig& c) {
    RunRecord rec;
    rec.config_hash = rcm::config_hash(c);
    const TestSystem sys = resolve_system(c);
    const Vec xi = c.xi.size() == sys.state_dim ? c.xi : Vec::Zero(sys.state_dim);
    Json per_seed = Json::array();
    bool all_pass = true;
    for (std::uint64_t seed : c.noise.seeds) {
        NoiseSpec noise = c.noise;
        noise.dim = sys.noise_dim;
        const SampledPath path = make_noise_path(noise, seed);
        const RoughPath rp = lift_smooth(restrict_path(path, 0.0, c.t + c.tau), c.alpha);
        const double tol = 1e-3;
        const CocycleReport rep =
            cocycle_check(sys.A, sys.F, sys.G, xi, rp, c.t, c.tau, tol, c.solver);
        all_pass = all_pass && rep.pass;
        per_seed.push_back(Json{{"seed", seed}, {"gap", rep.gap}, {"pass", rep.pass}});
    }
    rec.diagnostics["seeds"] = std::move(per_seed);
    const std::string file = out_path(c, "cocycle.json");
    write_json(file, rec.diagnostics);
    rec.artifacts.push_back(file);
    if (!all_pass) rec.exit_code = 2;
    return rec;
}

} // namespace rcm
