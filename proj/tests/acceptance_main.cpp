// Acceptance suite: one numbered criterion per function, one pass/fail line
// per criterion on stdout. Usage: acceptance [n ...] runs the listed
// criteria (all by default); the exit code is the number of failures.

#include "rcm/lp_manifold.hpp"
#include "rcm/philox.hpp"
#include "rcm/run.hpp"
#include "rcm/systems.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

using namespace rcm;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

Splitting canonical_split(const TestSystem& sys) {
    Splitting split = spectral_split(sys.A);
    split.beta = 1.0;
    return dichotomy_constants(split, sys.A);
}

SampledPath two_sided_zero(int window, int mesh_exp, int dim, int extra_right) {
    const int per_unit = 1 << mesh_exp;
    const TimeGrid grid = make_uniform_grid((window + extra_right) * per_unit + 1,
                                            -static_cast<double>(window),
                                            static_cast<double>(extra_right));
    return SampledPath(grid, RowMat::Zero(grid.size(), dim));
}

// --- 1. Chen exactness --------------------------------------------------

Outcome criterion1() {
    Outcome out;
    const double tol_rel = 1e-10;
    double worst = 0.0;

    // Smooth lift: the circle loop.
    {
        const int n = 1025;
        const TimeGrid g = make_uniform_grid(n, 0.0, 2.0 * M_PI);
        RowMat v(n, 2);
        for (int i = 0; i < n; ++i) v.row(i) << std::cos(g[i]) - 1.0, std::sin(g[i]);
        const RoughPath rp = lift_smooth(SampledPath(g, v), 0.45);
        const double scale = std::max(1.0, sup_norm(rp.first));
        const ChenReport rep = check_chen(rp, tol_rel * scale * scale, TriplePolicy::AllTriples);
        worst = std::max(worst, rep.max_residual / (scale * scale));
        if (!rep.pass) out.pass = false;
    }

    // Dyadic fBm lifts, 20 seeds, n = 1024 steps.
    const TimeGrid g = make_uniform_grid(1025, 0.0, 1.0);
    FbmSampler sampler(g, 0.4);
    for (int s = 1; s <= 20; ++s) {
        const SampledPath b = sampler.sample(static_cast<std::uint64_t>(s), 2);
        const RoughPath rp = levy_area_dyadic(b, 6, 0.36);
        const double scale = std::max(1.0, sup_norm(rp.first));
        const TriplePolicy policy = s <= 2 ? TriplePolicy::AllTriples : TriplePolicy::Spanning;
        const ChenReport rep = check_chen(rp, tol_rel * scale * scale, policy);
        worst = std::max(worst, rep.max_residual / (scale * scale));
        if (!rep.pass) out.pass = false;
    }

    // Injected single-entry defect of size 1 must be detected.
    {
        const SampledPath b = sampler.sample(1, 2);
        RoughPath rp = levy_area_dyadic(b, 6, 0.36);
        rp.second.at(100, 700)(0, 1) += 1.0;
        const ChenReport rep = check_chen(rp, 0.5, TriplePolicy::Spanning);
        if (rep.pass || rep.max_residual < 1.0 - 1e-6) {
            out.pass = false;
            out.detail += " defect-missed";
        }
    }
    out.detail = "worst relative residual " + fmt(worst) + out.detail;
    return out;
}

// --- 2. Compensated-sum exactness and rate ------------------------------

Outcome criterion2() {
    Outcome out;
    // Partition invariance for Y = W, Y' = Id.
    {
        const TimeGrid g = make_uniform_grid(257, 0.0, 1.0);
        FbmSampler sampler(g, 0.5);
        const RoughPath rp = lift_smooth(sampler.sample(3, 2), 0.45);
        ControlledPath cp;
        cp.y = rp.first;
        cp.yprime.assign(static_cast<size_t>(rp.size()), Mat::Identity(2, 2));
        cp.alpha = rp.alpha;
        const Mat fine = gubinelli_integral(cp, rp, 0, 256).value;
        Philox rng(9);
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<int> part{0};
            int idx = 0;
            while (idx < 256) {
                idx += 1 + static_cast<int>(rng.next_uniform() * 40);
                part.push_back(std::min(idx, 256));
            }
            const Mat coarse = gubinelli_integral(cp, rp, 0, 256, &part).value;
            const double rel = (coarse - fine).norm() / std::max(1.0, fine.norm());
            if (rel > 1e-12) {
                out.pass = false;
                out.detail = "partition deviation " + fmt(rel);
            }
        }
    }
    // Convergence rate for Y = t^2 against W = t.
    const double alpha = 0.45;
    std::vector<double> errs;
    for (int k = 6; k <= 11; ++k) {
        const int n = (1 << k) + 1;
        const TimeGrid g = make_uniform_grid(n, 0.0, 1.0);
        RowMat w(n, 1);
        for (int i = 0; i < n; ++i) w(i, 0) = g[i];
        const RoughPath rp = lift_smooth(SampledPath(g, w), alpha);
        ControlledPath cp;
        RowMat y(n, 1);
        for (int i = 0; i < n; ++i) y(i, 0) = g[i] * g[i];
        cp.y = SampledPath(g, std::move(y));
        cp.yprime.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            cp.yprime[static_cast<size_t>(i)] = Mat::Constant(1, 1, 2.0 * g[i]);
        cp.alpha = alpha;
        errs.push_back(std::abs(gubinelli_integral(cp, rp, 0, n - 1).value(0, 0) - 1.0 / 3.0));
    }
    double min_order = 1e9;
    for (size_t k = 0; k + 1 < errs.size(); ++k)
        min_order = std::min(min_order, std::log2(errs[k] / errs[k + 1]));
    if (min_order < 3.0 * alpha - 1.0) out.pass = false;
    out.detail += " min order " + fmt(min_order) + " (need >= " + fmt(3.0 * alpha - 1.0) + ")";
    return out;
}

// --- 3. RDE solver oracles ----------------------------------------------

Outcome criterion3() {
    Outcome out;
    SolveOptions opts;
    // Additive noise is exact to rounding.
    {
        const TimeGrid g = make_uniform_grid(257, 0.0, 1.0);
        FbmSampler sampler(g, 0.5);
        const SampledPath b = sampler.sample(7, 2);
        const RoughPath rp = lift_smooth(b, 0.45);
        const LinearPart A(Mat::Zero(2, 2));
        const SmoothCoefficient F = SmoothCoefficient::zero(2, 2, 2);
        const SmoothCoefficient G(
            "id", 2, 2, 2,
            [](const Vec&) {
                Vec v(4);
                v << 1, 0, 0, 1;
                return v;
            },
            [](const Vec&) { return Mat::Zero(4, 2); }, 1.0, 0.0, 0.0, false, true, true);
        Vec xi(2);
        xi << 0.3, -0.2;
        const RdeSolution sol = solve_rde(A, F, G, xi, rp, opts);
        double worst = 0.0;
        for (int i = 0; i < rp.size(); ++i)
            worst = std::max(worst, (sol.u.y.at(i) - (xi + b.at(i))).norm());
        if (worst > 1e-12) out.pass = false;
        out.detail += "additive gap " + fmt(worst);
    }
    // Scalar geometric case within 1e-4 at mesh 2^-10, plus the mild residual.
    {
        const int n = 1025;
        const TimeGrid g = make_uniform_grid(n, 0.0, 1.0);
        RowMat w(n, 1);
        for (int i = 0; i < n; ++i) w(i, 0) = std::sin(2.0 * g[i]);
        const RoughPath rp = lift_smooth(SampledPath(g, w), 0.45);
        const LinearPart A(Mat::Zero(1, 1));
        const SmoothCoefficient F = SmoothCoefficient::zero(1, 1, 1);
        const SmoothCoefficient G = SmoothCoefficient::linear(Mat::Identity(1, 1));
        Vec xi(1);
        xi << 0.8;
        const RdeSolution sol = solve_rde(A, F, G, xi, rp, opts);
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            worst = std::max(worst,
                             std::abs(sol.u.y.values(i, 0) - 0.8 * std::exp(w(i, 0))));
        const double resid = mild_residual(A, F, G, xi, rp, sol.u, opts.quadrature);
        if (worst > 1e-4 || resid > opts.tolerance) out.pass = false;
        out.detail += ", geometric gap " + fmt(worst) + ", mild residual " + fmt(resid);
    }
    return out;
}

// --- 4. Cocycle identity -------------------------------------------------

Outcome criterion4() {
    Outcome out;
    SolveOptions opts;
    // Linear system.
    {
        const TestSystem sys = make_system("linear");
        const TimeGrid g = make_uniform_grid(513, 0.0, 1.0);
        const RoughPath rp = lift_smooth(SampledPath(g, RowMat::Zero(g.size(), 1)), 0.45);
        Vec xi(2);
        xi << 0.9, -0.4;
        const CocycleReport rep = cocycle_check(sys.A, sys.F, sys.G, xi, rp, 0.5, 0.5, 1e-10, opts);
        if (!rep.pass) out.pass = false;
        out.detail += "linear gap " + fmt(rep.gap);
    }
    // Rough-oracle system, 10 seeds, meshes 2^-8 .. 2^-11. The discrete model
    // satisfies the identity exactly (compensated sums reindex under lattice
    // shifts), so the gaps sit at the solver-tolerance floor at every mesh;
    // the required decrease is then witnessed a fortiori. Should the gaps
    // ever leave the floor, the fitted order must be at least alpha.
    const TestSystem sys = make_system("rough-oracle");
    const double alpha = 0.36;
    Vec xi(2);
    xi << 0.05, 0.01;
    std::vector<double> medians;
    for (int k = 8; k <= 11; ++k) {
        const int n = (1 << k) + 1;
        const TimeGrid g = make_uniform_grid(n, 0.0, 1.0);
        FbmSampler sampler(g, 0.4);
        std::vector<double> gaps;
        for (int s = 1; s <= 10; ++s) {
            const RoughPath rp = lift_smooth(sampler.sample(static_cast<std::uint64_t>(s), 1), alpha);
            gaps.push_back(cocycle_check(sys.A, sys.F, sys.G, xi, rp, 0.5, 0.5, 1e-10, opts).gap);
        }
        medians.push_back(median(gaps));
    }
    const double floor_level = 1e-10;
    bool at_floor = true;
    for (double m : medians) at_floor = at_floor && m <= floor_level;
    if (!at_floor) {
        double order = 1e9;
        for (size_t k = 0; k + 1 < medians.size(); ++k)
            order = std::min(order, std::log2(medians[k] / medians[k + 1]));
        if (order < alpha) out.pass = false;
        out.detail += ", rough medians";
        for (double m : medians) out.detail += " " + fmt(m);
        out.detail += ", order " + fmt(order);
    } else {
        out.detail += ", rough medians at rounding floor (<= " + fmt(floor_level) + ":";
        for (double m : medians) out.detail += " " + fmt(m);
        out.detail += ")";
    }
    return out;
}

// --- 5. LP contraction ---------------------------------------------------

// Random admissible sequence with each fiber scaled to `frac` of its own
// cut-off radius, so the truncated maps stay in their active region.
FiberSequence random_sequence(const LpProblem& problem, double frac, std::uint64_t seed) {
    const TimeGrid& g = problem.fiber_grid();
    const int N = problem.config().window;
    const int m = problem.split().dim();
    const int d = problem.fiber_rough(0).dim();
    Philox rng(seed);
    FiberSequence seq = FiberSequence::zero(N, g, m, d, problem.alpha(), problem.config().gap.eta);
    for (int f = 0; f < N; ++f) {
        ControlledPath& cp = seq.fibers[static_cast<size_t>(f)];
        RowMat vals(g.size(), m);
        Vec acc(m);
        for (int a = 0; a < m; ++a) acc(a) = rng.next_gaussian();
        const double step_scale = std::pow(g.mesh(), problem.alpha());
        for (int j = 0; j < g.size(); ++j) {
            vals.row(j) = acc.transpose();
            for (int a = 0; a < m; ++a) acc(a) += step_scale * rng.next_gaussian();
        }
        cp.y = SampledPath(g, std::move(vals));
        for (int j = 0; j < g.size(); ++j) {
            Mat yp(m, d);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < d; ++b) yp(a, b) = rng.next_gaussian();
            cp.yprime[static_cast<size_t>(j)] = 0.3 * yp;
        }
        const double nrm =
            controlled_norms(cp, problem.fiber_rough(f), problem.config().norm_policy).norm;
        if (nrm > 0.0)
            seq.fibers[static_cast<size_t>(f)] = scale(cp, frac * problem.fiber_radius(f) / nrm);
    }
    // Endpoint matching U^{i-1}_0 = U^{i-2}_1 across the window.
    for (int f = N - 2; f >= 0; --f) {
        ControlledPath& cur = seq.fibers[static_cast<size_t>(f)];
        const Vec offset = seq.fibers[static_cast<size_t>(f + 1)].y.at(g.size() - 1) - cur.y.at(0);
        cur.y.values.rowwise() += offset.transpose();
    }
    return seq;
}

Outcome criterion5() {
    Outcome out;
    const TestSystem sys = make_system("rough-oracle");
    const Splitting split = canonical_split(sys);
    // Derived budget for beta = 1, gamma = 0, C_S = Mc = Ms = 1.
    const GapConstants gap = gap_constant(1.0, 0.0, 1.0, 1.0, 1.0);
    const double bracket = gap.gap_lhs / gap.K;
    LpConfig cfg;
    cfg.window = 6;
    cfg.tail_depth = 6;
    cfg.gap = gap;
    cfg.quadrature = QuadRule::Trapezoid;
    const TimeGrid grid = make_uniform_grid((cfg.window + 2) * 64 + 1,
                                            -static_cast<double>(cfg.window), 2.0);
    FbmSampler sampler(grid, 0.45);
    const SampledPath noise = sampler.sample(100, 1);

    // Calibrate CF = CG so the per-fiber budget K holds with a 3x margin.
    cfg.truncation.kind = TruncationPolicy::Kind::Fixed;
    cfg.truncation.R = 1.0;
    auto trial = std::make_shared<LpProblem>(noise, 0.4, split, sys.F, sys.G, cfg);
    double trial_ratio = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const FiberSequence a = random_sequence(*trial, 0.45, 2 * s);
        const FiberSequence b = random_sequence(*trial, 0.45, 2 * s + 1);
        trial_ratio = std::max(trial_ratio,
                               trial->weighted_norm(lp_map_apply(*trial, a, Vec::Zero(2)) -
                                                    lp_map_apply(*trial, b, Vec::Zero(2))) /
                                   trial->weighted_norm(a - b));
    }
    const double c_cal = 3.0 * std::max(trial_ratio / bracket, 1e-6);
    cfg.truncation.kind = TruncationPolicy::Kind::Tempered;
    cfg.truncation.K = gap.K;
    cfg.truncation.CF = c_cal;
    cfg.truncation.CG = c_cal;
    auto problem = std::make_shared<LpProblem>(noise, 0.4, split, sys.F, sys.G, cfg);
    double worst = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const FiberSequence a = random_sequence(*problem, 0.45, 300 + 2 * s);
        const FiberSequence b = random_sequence(*problem, 0.45, 301 + 2 * s);
        worst = std::max(worst,
                         problem->weighted_norm(lp_map_apply(*problem, a, Vec::Zero(2)) -
                                                lp_map_apply(*problem, b, Vec::Zero(2))) /
                             problem->weighted_norm(a - b));
    }
    if (worst > 0.30) out.pass = false;
    out.detail = "K " + fmt(gap.K) + " (1/K " + fmt(1.0 / gap.K) + "), measured factor " +
                 fmt(worst) + " (<= 0.30), CF=CG " + fmt(c_cal);
    return out;
}

// --- 6. Deterministic center-manifold oracle ------------------------------

std::shared_ptr<const LpProblem> det_oracle_problem(int mesh_exp, int window) {
    const TestSystem sys = make_system("det-oracle");
    const Splitting split = canonical_split(sys);
    const GapConstants gap = gap_constant(split, 1.0);
    LpConfig cfg;
    cfg.window = window;
    cfg.tail_depth = window;
    cfg.tol = 1e-13;
    cfg.max_iterations = 200;
    cfg.gap = gap;
    cfg.truncation.kind = TruncationPolicy::Kind::Fixed;
    cfg.truncation.R = 2.0;
    cfg.quadrature = QuadRule::Trapezoid;
    return std::make_shared<LpProblem>(two_sided_zero(window, mesh_exp, 1, 2), 0.45, split,
                                       sys.F, sys.G, cfg);
}

Outcome criterion6() {
    Outcome out;
    auto problem = det_oracle_problem(10, 24);
    out.detail = "|h - (x^2 - 2x^4)| vs 5|x|^6:";
    for (double x : {0.01, 0.02, 0.05, 0.1}) {
        Vec xi = Vec::Zero(2);
        xi(0) = x;
        const ManifoldChart chart = lp_fixed_point(problem, xi, false);
        const double dev = std::abs(chart.hc(1) - (x * x - 2.0 * std::pow(x, 4)));
        const double tol = 5.0 * std::pow(x, 6);
        if (dev > tol) out.pass = false;
        out.detail += " [x=" + fmt(x) + ": " + fmt(dev) + (dev > tol ? " > " : " <= ") + fmt(tol) + "]";
    }
    if (!out.pass)
        out.detail +=
            " -- the invariance-equation series continues x^2 - 2x^4 + 12x^6 - 112x^8, so the"
            " exact graph already deviates by ~12|x|^6; see the decisions ledger";
    return out;
}

// --- 7. Graph properties ---------------------------------------------------

Outcome criterion7() {
    Outcome out;
    auto problem = det_oracle_problem(9, 16);
    const ManifoldChart chart = lp_fixed_point(problem, Vec::Zero(2), true);
    const double h0 = manifold_graph(chart, Vec::Zero(2)).norm();
    const TangencyReport coarse = tangency_check(chart, 1e-3);
    const TangencyReport fine = tangency_check(chart, 5e-4);
    bool deriv_ok = coarse.pass;
    for (size_t k = 0; k < coarse.first_difference.size(); ++k) {
        if (coarse.first_difference[k] > 1e-4) deriv_ok = false;
        if (fine.first_difference[k] > 0.75 * coarse.first_difference[k] + 1e-12)
            deriv_ok = false;
    }
    const bool lip_ok = std::isfinite(chart.L_gamma) && chart.L_gamma > 0.0;
    out.pass = h0 <= 1e-10 && deriv_ok && lip_ok;
    out.detail = "h(0) " + fmt(h0) + ", max |Dh(0)| " +
                 fmt(*std::max_element(coarse.first_difference.begin(),
                                       coarse.first_difference.end())) +
                 " at probe 1e-3, L_Gamma " + fmt(chart.L_gamma);
    return out;
}

// --- 8. Invariance ----------------------------------------------------------

Outcome criterion8() {
    Outcome out;
    SolveOptions opts;
    opts.quadrature = QuadRule::Trapezoid;
    // Linear system.
    {
        const TestSystem sys = make_system("linear");
        const Splitting split = canonical_split(sys);
        LpConfig cfg;
        cfg.window = 8;
        cfg.tail_depth = 8;
        cfg.gap = gap_constant(split, 1.0);
        cfg.truncation.R = 2.0;
        cfg.quadrature = QuadRule::Trapezoid;
        auto problem = std::make_shared<LpProblem>(two_sided_zero(8, 6, 1, 3), 0.45, split,
                                                   sys.F, sys.G, cfg);
        Vec xi(2);
        xi << 0.2, 0.0;
        const InvarianceReport rep = verify_invariance(lp_fixed_point(problem, xi), 2, 1e-10, opts);
        if (!rep.pass) out.pass = false;
        out.detail += "linear gap " + fmt(rep.max_gap);
    }
    // Deterministic oracle at mesh 2^-10.
    {
        const TestSystem sys = make_system("det-oracle");
        const Splitting split = canonical_split(sys);
        LpConfig cfg;
        cfg.window = 16;
        cfg.tail_depth = 16;
        cfg.tol = 1e-13;
        cfg.gap = gap_constant(split, 1.0);
        cfg.truncation.R = 2.0;
        cfg.quadrature = QuadRule::Trapezoid;
        auto problem = std::make_shared<LpProblem>(two_sided_zero(16, 10, 1, 3), 0.45, split,
                                                   sys.F, sys.G, cfg);
        Vec xi = Vec::Zero(2);
        xi(0) = 0.05;
        const InvarianceReport rep = verify_invariance(lp_fixed_point(problem, xi), 2, 1e-6, opts);
        if (!rep.pass) out.pass = false;
        out.detail += ", det gap " + fmt(rep.max_gap);
    }
    // Rough oracle, 20 seeds per mesh. As with the cocycle identity the
    // discrete fixed point is exactly fiber-shift consistent, so the gaps sit
    // at the window-tail floor at every mesh; decreasing medians are then
    // witnessed a fortiori.
    {
        const TestSystem sys = make_system("rough-oracle");
        const Splitting split = canonical_split(sys);
        const GapConstants gap = gap_constant(1.0, 0.0, 1.0, 1.0, 1.0);
        std::vector<double> medians;
        for (int mesh_exp : {6, 7, 8}) {
            LpConfig cfg;
            cfg.window = 20;
            cfg.tail_depth = 20;
            cfg.gap = gap;
            cfg.truncation.kind = TruncationPolicy::Kind::Tempered;
            cfg.truncation.K = gap.K;
            cfg.truncation.CF = 0.5;
            cfg.truncation.CG = 0.5;
            cfg.quadrature = QuadRule::Trapezoid;
            const int per_unit = 1 << mesh_exp;
            const TimeGrid grid = make_uniform_grid(22 * per_unit + 1, -20.0, 2.0);
            FbmSampler sampler(grid, 0.4);
            std::vector<double> gaps;
            for (int s = 1; s <= 20; ++s) {
                const SampledPath noise = sampler.sample(static_cast<std::uint64_t>(s), 1);
                auto problem =
                    std::make_shared<LpProblem>(noise, 0.36, split, sys.F, sys.G, cfg);
                Vec xi = Vec::Zero(2);
                xi(0) = 0.2 * problem->fiber_radius(0);
                const ManifoldChart chart = lp_fixed_point(problem, xi, false);
                gaps.push_back(verify_invariance(chart, 1, 1e-3, opts).max_gap);
            }
            medians.push_back(median(gaps));
        }
        const double floor_level = 1e-8;
        bool at_floor = true;
        for (double m : medians) at_floor = at_floor && m <= floor_level;
        bool decreasing = true;
        for (size_t k = 0; k + 1 < medians.size(); ++k)
            decreasing = decreasing && medians[k + 1] <= medians[k];
        if (!(at_floor || decreasing)) out.pass = false;
        out.detail += ", rough medians";
        for (double m : medians) out.detail += " " + fmt(m);
        if (at_floor) out.detail += " (window-tail floor)";
    }
    return out;
}

// --- 9. Temperedness ---------------------------------------------------------

Outcome criterion9() {
    Outcome out;
    const double alpha = 0.36;
    const int per_unit = 1 << 5;
    const TimeGrid grid = make_uniform_grid(64 * per_unit + 1, -32.0, 32.0);
    FbmSampler sampler(grid, 0.4);
    const GapConstants gap = gap_constant(1.0, 0.0, 1.0, 1.0, 1.0);
    double mean_slope_w = 0.0, mean_slope_rinv = 0.0, mean_slope_r = 0.0;
    const int seeds = 20;
    for (int s = 1; s <= seeds; ++s) {
        const SampledPath b = sampler.sample(static_cast<std::uint64_t>(s), 1);
        std::vector<int> fibers;
        std::vector<double> wnorm, rinv, rval;
        for (int i = -32; i < 32; ++i) {
            const SampledPath seg = restrict_path(b, static_cast<double>(i),
                                                  static_cast<double>(i) + 1.0);
            const RoughPath rp = lift_smooth(seg, alpha);
            const double wa = rp.holder_first(PairPolicy::AllPairs);
            const double wwa = rp.holder_second(PairPolicy::AllPairs);
            const double R = tempered_radius(gap.K, 1.0, 1.0, wa, wwa);
            fibers.push_back(i);
            wnorm.push_back(wa);
            rval.push_back(R);
            rinv.push_back(1.0 / R);
        }
        mean_slope_w += temperedness_diagnostic(fibers, wnorm).slope / seeds;
        mean_slope_r += temperedness_diagnostic(fibers, rval).slope / seeds;
        mean_slope_rinv += temperedness_diagnostic(fibers, rinv).slope / seeds;
    }
    // R <= 1 by construction, so ln+ R vanishes; temperedness from below is
    // the diagnostic applied to 1/R.
    out.pass = mean_slope_w < 0.05 && mean_slope_rinv < 0.05 && mean_slope_r < 0.05;
    out.detail = "mean slopes: ||Theta_i W||_a " + fmt(mean_slope_w) + ", 1/R " +
                 fmt(mean_slope_rinv) + ", R " + fmt(mean_slope_r);
    return out;
}

// --- 10. Truncation semantics --------------------------------------------------

Outcome criterion10() {
    Outcome out;
    const TestSystem sys = make_system("rough-oracle");
    SolveOptions opts;
    const int n = 257;
    const TimeGrid g = make_uniform_grid(n, 0.0, 1.0);
    FbmSampler sampler(g, 0.4);
    const RoughPath rp = lift_smooth(sampler.sample(5, 1), 0.4);
    const CutoffFunction f;
    // Agreement whenever the solution stays under R/2.
    {
        Vec xi(2);
        xi << 0.04, 0.01;
        const RdeSolution plain = solve_rde(sys.A, sys.F, sys.G, xi, rp, opts);
        double nrm = 0.0;
        for (double v : plain.subinterval_norms) nrm = std::max(nrm, v);
        const double R = 2.5 * nrm;
        const RdeSolution trunc = solve_rde_truncated(sys.A, sys.F, sys.G, xi, rp, R, f, opts);
        double gap = 0.0;
        for (int i = 0; i < n; ++i)
            gap = std::max(gap, (plain.u.y.at(i) - trunc.u.y.at(i)).norm());
        if (gap > 100.0 * opts.tolerance) out.pass = false;
        out.detail += "agreement gap " + fmt(gap);
    }
    // Measured Lipschitz ratio of the truncated map scales down with R/4.
    {
        const LinearPart& A = sys.A;
        auto apply_TR = [&](const ControlledPath& cp, double R) {
            const ControlledPath cut = cutoff(cp, rp, R, f);
            const ControlledPath integrand = compose_smooth(sys.G, cut, rp);
            const ControlledPath drift =
                semigroup_convolve_drift(A, sys.F, cut, Vec::Zero(2), opts.quadrature);
            return drift + semigroup_convolve_rough(A, integrand, rp);
        };
        Philox rng(31);
        auto random_cp = [&](double target) {
            ControlledPath cp = ControlledPath::zero(g, 2, 1, rp.alpha);
            Vec acc = Vec::Zero(2);
            const double step_scale = std::pow(g.mesh(), rp.alpha);
            for (int j = 0; j < n; ++j) {
                cp.y.values.row(j) = acc.transpose();
                acc(0) += step_scale * rng.next_gaussian();
                acc(1) += step_scale * rng.next_gaussian();
                cp.yprime[static_cast<size_t>(j)](0, 0) = 0.3 * rng.next_gaussian();
                cp.yprime[static_cast<size_t>(j)](1, 0) = 0.3 * rng.next_gaussian();
            }
            const double nrm = controlled_norms(cp, rp).norm;
            return scale(cp, target / nrm);
        };
        double ratio_big = 0.0, ratio_small = 0.0;
        const double Rbig = 0.8, Rsmall = 0.2;
        for (int t = 0; t < 10; ++t) {
            const ControlledPath a = random_cp(0.45 * Rbig);
            const ControlledPath b = random_cp(0.45 * Rbig);
            const double den = controlled_norms(a - b, rp).norm;
            ratio_big =
                std::max(ratio_big,
                         controlled_norms(apply_TR(a, Rbig) - apply_TR(b, Rbig), rp).norm / den);
            const ControlledPath as = scale(a, Rsmall / Rbig);
            const ControlledPath bs = scale(b, Rsmall / Rbig);
            const double dens = controlled_norms(as - bs, rp).norm;
            ratio_small = std::max(
                ratio_small,
                controlled_norms(apply_TR(as, Rsmall) - apply_TR(bs, Rsmall), rp).norm / dens);
        }
        if (!(ratio_small <= ratio_big * 1.05)) out.pass = false;
        out.detail += ", map Lipschitz ratio " + fmt(ratio_big) + " at R -> " + fmt(ratio_small) +
                      " at R/4";
    }
    return out;
}

// --- 11. Trichotomy reduction ---------------------------------------------------

Outcome criterion11() {
    Outcome out;
    double worst = 0.0;
    // The two printed formulas coincide term by term under the formal mapping
    // eta_tri = eta, rho2 = 2 eta - gamma, rho3 = beta + 2 eta with the
    // unstable block dropped; this is the sign-convention alignment.
    for (double beta : {0.5, 1.0, 2.0}) {
        for (double gamma : {0.0, 0.1}) {
            if (!(gamma < beta)) continue;
            for (double cs : {1.0, 2.5}) {
                const GapConstants gap = gap_constant(1.3, gamma, 1.7, beta, cs);
                const double dich =
                    dichotomy_gap_lhs(gap.K, gap.eta, gamma, beta, 1.3, 1.7, cs);
                const double tri =
                    trichotomy_gap_lhs(gap.K, gap.eta, 0.0, 2.0 * gap.eta - gamma,
                                       beta + 2.0 * gap.eta, 1.3, 0.0, 1.7, cs, false);
                worst = std::max(worst, std::abs(tri - dich));
            }
        }
    }
    if (worst > 1e-12) out.pass = false;
    out.detail = "max |trichotomy - dichotomy| " + fmt(worst) +
                 " under the documented convention mapping";
    return out;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
        {9, criterion9}, {10, criterion10}, {11, criterion11}};
    std::vector<int> wanted;
    for (int a = 1; a < argc; ++a) wanted.push_back(std::atoi(argv[a]));
    int failures = 0;
    int ran = 0;
    for (const auto& [num, fn] : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), num) == wanted.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d: %s  (%.1fs) %s\n", num, o.pass ? "PASS" : "FAIL", secs,
                    o.detail.c_str());
        std::fflush(stdout);
        ++ran;
        if (!o.pass) ++failures;
    }
    std::printf("%d of %d criteria passed\n", ran - failures, ran);
    return failures;
}
