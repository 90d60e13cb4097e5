#include "rcm/lp_manifold.hpp"

#include <cmath>
#include <limits>

namespace rcm {

double dichotomy_gap_lhs(double K, double eta, double gamma, double beta, double Mc, double Ms,
                         double C_S) {
    if (!(beta + eta > 0.0) || !(gamma - eta > 0.0))
        throw std::invalid_argument("dichotomy_gap_lhs: need -beta < eta < 0 <= gamma");
    const double stable_term =
        std::exp(beta + eta) * (C_S * Ms * std::exp(-eta) + 1.0) / (1.0 - std::exp(-(beta + eta)));
    const double center_term =
        std::exp(gamma - eta) * (C_S * Mc * std::exp(-eta) + 1.0) / (1.0 - std::exp(-(gamma - eta)));
    return K * (stable_term + center_term);
}

double trichotomy_gap_lhs(double K, double eta, double rho1, double rho2, double rho3, double Mc,
                          double Mu, double Ms, double C_S, bool include_unstable) {
    const double center_term = std::exp(eta - rho2) * (C_S * Mc * std::exp(-eta) + 1.0) /
                               (1.0 - std::exp(-(eta - rho2)));
    const double stable_term = std::exp(rho3 - eta) * (C_S * Ms * std::exp(-eta) + 1.0) /
                               (1.0 - std::exp(-(rho3 - eta)));
    double unstable_term = 0.0;
    if (include_unstable)
        unstable_term = std::exp(rho1 - eta) * (C_S * Mu * std::exp(-eta) + 1.0) /
                        (1.0 - std::exp(-(rho1 - eta)));
    return K * (center_term + unstable_term + stable_term);
}

GapConstants gap_constant(double Mc, double gamma, double Ms, double beta, double C_S,
                          std::optional<double> eta_opt, std::optional<double> K_opt) {
    if (!(gamma < beta)) throw InvalidSplit("gap_constant: need gamma < beta");
    GapConstants g;
    g.Mc = Mc;
    g.gamma = gamma;
    g.Ms = Ms;
    g.beta = beta;
    g.C_S = C_S;
    g.eta = eta_opt.value_or((gamma - beta) / 2.0);
    if (!(-beta < g.eta && g.eta < 0.0))
        throw InvalidSplit("gap_constant: eta outside (-beta, 0)");
    if (K_opt) {
        g.K = *K_opt;
    } else {
        const double m = (beta + gamma) / 2.0;
        g.K = (1.0 - std::exp(-m)) /
              (4.0 * std::exp(m) * (std::exp((beta - gamma) / 2.0) * C_S * (Ms + Mc) + 1.0));
    }
    g.gap_lhs = dichotomy_gap_lhs(g.K, g.eta, gamma, beta, Mc, Ms, C_S);
    g.valid = g.gap_lhs < 0.25;
    return g;
}

GapConstants gap_constant(const Splitting& split, double C_S, std::optional<double> eta,
                          std::optional<double> K) {
    return gap_constant(split.Mc, split.gamma, split.Ms, split.beta, C_S, eta, K);
}

TrichotomyGapConstants trichotomy_gap_constant(const Splitting& split, double C_S,
                                               std::optional<double> eta_opt) {
    TrichotomyGapConstants t;
    t.rho1 = split.rho1;
    t.rho2 = split.rho2;
    t.rho3 = split.rho3;
    t.Mc = split.Mc;
    t.Mu = split.Mu;
    t.Ms = split.Ms;
    t.C_S = C_S;
    t.has_unstable = !split.unstable.empty();
    const double upper = t.has_unstable ? std::min(t.rho1, t.rho3) : t.rho3;
    if (!(t.rho2 < upper)) throw InvalidSplit("trichotomy_gap_constant: no admissible eta");
    t.eta = eta_opt.value_or(0.5 * (t.rho2 + upper));
    if (!(t.rho2 < t.eta && t.eta < upper))
        throw InvalidSplit("trichotomy_gap_constant: eta outside (rho2, min(rho1, rho3))");
    const double unit =
        trichotomy_gap_lhs(1.0, t.eta, t.rho1, t.rho2, t.rho3, t.Mc, t.Mu, t.Ms, C_S, t.has_unstable);
    t.K = 0.99 * 0.25 / unit;
    t.gap_lhs = t.K * unit;
    t.valid = t.gap_lhs < 0.25;
    return t;
}

double tempered_radius(double K, double CF, double CG, double w_norm, double ww_norm) {
    if (!(K > 0.0)) throw std::invalid_argument("tempered_radius: K must be > 0");
    if (CF < 0.0 || CG < 0.0 || w_norm < 0.0 || ww_norm < 0.0)
        throw std::invalid_argument("tempered_radius: inputs must be nonnegative");
    if (CF == 0.0 && CG == 0.0) throw std::invalid_argument("tempered_radius: CF = CG = 0");
    const double denom = CF + CG * (1.0 + w_norm) * (w_norm + ww_norm);
    if (denom == 0.0) return 1.0;
    return std::min(K / denom, 1.0);
}

FiberSequence FiberSequence::zero(int window, const TimeGrid& grid, int m, int d, double alpha,
                                  double eta) {
    FiberSequence seq;
    seq.eta = eta;
    seq.fibers.reserve(static_cast<size_t>(window));
    for (int f = 0; f < window; ++f) seq.fibers.push_back(ControlledPath::zero(grid, m, d, alpha));
    return seq;
}

FiberSequence operator-(const FiberSequence& a, const FiberSequence& b) {
    FiberSequence out = a;
    for (size_t f = 0; f < out.fibers.size(); ++f) out.fibers[f] = out.fibers[f] - b.fibers[f];
    return out;
}

namespace {

Mat reconstruct_generator(const Splitting& s) {
    Mat A = Mat::Zero(s.dim(), s.dim());
    if (!s.center.empty()) A += s.center.V * s.center.Ar * s.center.W.transpose();
    if (!s.stable.empty()) A += s.stable.V * s.stable.Ar * s.stable.W.transpose();
    if (!s.unstable.empty()) A += s.unstable.V * s.unstable.Ar * s.unstable.W.transpose();
    return A;
}

} // namespace

RoughPath LpProblem::make_fiber(double left_time) const {
    SampledPath seg = restrict_path(path_, left_time, left_time + 1.0);
    if (cfg_.levy_level < 0) return lift_smooth(seg, alpha_);
    int max_level = 0;
    while ((1 << (max_level + 1)) <= seg.size() - 1) ++max_level;
    return levy_area_dyadic(seg, std::min(cfg_.levy_level, max_level), alpha_);
}

LpProblem::LpProblem(SampledPath two_sided_path, double alpha, Splitting split, SmoothCoefficient F,
                     SmoothCoefficient G, LpConfig config, int origin)
    : path_(std::move(two_sided_path)),
      alpha_(alpha),
      split_(std::move(split)),
      F_(std::move(F)),
      G_(std::move(G)),
      cfg_(config),
      origin_(origin) {
    const int N = cfg_.window;
    if (N < 1 || cfg_.tail_depth < 1) throw std::invalid_argument("LpProblem: bad window/tail");
    fiber_rp_.reserve(static_cast<size_t>(N));
    fiber_R_.reserve(static_cast<size_t>(N));
    for (int f = 0; f < N; ++f) {
        fiber_rp_.push_back(make_fiber(static_cast<double>(origin_ - f - 1)));
        const RoughPath& rp = fiber_rp_.back();
        if (!rp.grid().same_times(fiber_rp_.front().grid()))
            throw std::invalid_argument("LpProblem: fibers must share one local grid");
        fiber_R_.push_back(forward_radius_for(rp));
    }
    const TimeGrid& g = fiber_grid();
    if (!g.uniform()) throw std::invalid_argument("LpProblem: fiber grid must be uniform");
    const double h = g.span() / (g.size() - 1);
    const Mat& Ac = split_.center.Ar;
    const Mat& As = split_.stable.Ar;
    step_c_ = make_exp_stepper(Ac, h);
    step_s_ = make_exp_stepper(As, h);
    Ec_t_.resize(static_cast<size_t>(g.size()));
    Es_t_.resize(static_cast<size_t>(g.size()));
    for (int j = 0; j < g.size(); ++j) {
        Ec_t_[static_cast<size_t>(j)] = matrix_exponential(Ac, g[j]);
        Es_t_[static_cast<size_t>(j)] = matrix_exponential(As, g[j]);
    }
    Ec_minus_ = matrix_exponential(Ac, -1.0);
    Ec_pow_.resize(static_cast<size_t>(N) + 2);
    Ec_pow_[0] = Mat::Identity(Ac.rows(), Ac.cols());
    for (size_t p = 1; p < Ec_pow_.size(); ++p) Ec_pow_[p] = Ec_minus_ * Ec_pow_[p - 1];
    const Mat Es_one = matrix_exponential(As, 1.0);
    Es_pow_.resize(static_cast<size_t>(N + cfg_.tail_depth) + 2);
    Es_pow_[0] = Mat::Identity(As.rows(), As.cols());
    for (size_t p = 1; p < Es_pow_.size(); ++p) Es_pow_[p] = Es_one * Es_pow_[p - 1];
}

double LpProblem::forward_radius_for(const RoughPath& rp) const {
    switch (cfg_.truncation.kind) {
        case TruncationPolicy::Kind::Tempered:
            return tempered_radius(cfg_.truncation.K, cfg_.truncation.CF, cfg_.truncation.CG,
                                   rp.holder_first(cfg_.norm_policy),
                                   rp.holder_second(cfg_.norm_policy));
        case TruncationPolicy::Kind::Fixed:
        case TruncationPolicy::Kind::None:
        default:
            return cfg_.truncation.R;
    }
}

LpProblem LpProblem::shifted(int new_origin) const {
    return LpProblem(path_, alpha_, split_, F_, G_, cfg_, new_origin);
}

RoughPath LpProblem::forward_fiber(int j) const {
    return make_fiber(static_cast<double>(origin_ + j));
}

double LpProblem::forward_radius(int j) const { return forward_radius_for(forward_fiber(j)); }

double LpProblem::weighted_norm(const FiberSequence& seq) const {
    double best = 0.0;
    for (int f = 0; f < seq.window(); ++f) {
        const double w = std::exp(seq.eta * (1.0 + f));
        const double nrm =
            controlled_norms(seq.fibers[static_cast<size_t>(f)], fiber_rough(f), cfg_.norm_policy)
                .norm;
        best = std::max(best, w * nrm);
    }
    return best;
}

FiberSequence LpProblem::apply(const FiberSequence& seq, const Vec& xi_c) const {
    const int N = cfg_.window;
    if (seq.window() != N) throw std::invalid_argument("lp_map_apply: window mismatch");
    const TimeGrid& g = fiber_grid();
    const int n = g.size();
    const int m = split_.dim();
    const int kc = split_.center.k();
    const int ks = split_.stable.k();
    const Mat& Vc = split_.center.V;
    const Mat& Vs = split_.stable.V;
    const Mat Wct = split_.center.W.transpose();
    const Mat Wst = split_.stable.W.transpose();

    // Per-fiber convolutions in restricted coordinates.
    std::vector<Mat> ic(static_cast<size_t>(N)), is(static_cast<size_t>(N));
    std::vector<ControlledPath> scaled(static_cast<size_t>(N));
    for (int f = 0; f < N; ++f) {
        const ControlledPath& U = seq.fibers[static_cast<size_t>(f)];
        const RoughPath& rp = fiber_rough(f);
        const double c = cutoff_factor(U, rp, fiber_R_[static_cast<size_t>(f)], cutoff_,
                                       cfg_.norm_policy);
        scaled[static_cast<size_t>(f)] = c == 1.0 ? U : scale(U, c);
        const ControlledPath& B = scaled[static_cast<size_t>(f)];

        Mat gc(kc, n), gs(ks, n);
        for (int j = 0; j < n; ++j) {
            const Vec Fv = F_.value(B.y.at(j));
            if (kc > 0) gc.col(j) = Wct * Fv;
            if (ks > 0) gs.col(j) = Wst * Fv;
        }
        const ControlledPath integrand = compose_smooth(G_, B, rp);
        Mat icf = Mat::Zero(kc, n), isf = Mat::Zero(ks, n);
        Vec accc = Vec::Zero(kc), accs = Vec::Zero(ks);
        for (int j = 0; j + 1 < n; ++j) {
            const Vec r = rough_one_step(integrand, rp, j, m);
            if (kc > 0) {
                accc = step_c_.E * accc + step_c_.Phi1 * (Wct * r) + step_c_.Phi1h * gc.col(j);
                if (cfg_.quadrature == QuadRule::Trapezoid)
                    accc += step_c_.Phi2h * (gc.col(j + 1) - gc.col(j));
                icf.col(j + 1) = accc;
            }
            if (ks > 0) {
                accs = step_s_.E * accs + step_s_.Phi1 * (Wst * r) + step_s_.Phi1h * gs.col(j);
                if (cfg_.quadrature == QuadRule::Trapezoid)
                    accs += step_s_.Phi2h * (gs.col(j + 1) - gs.col(j));
                isf.col(j + 1) = accs;
            }
        }
        ic[static_cast<size_t>(f)] = std::move(icf);
        is[static_cast<size_t>(f)] = std::move(isf);
    }

    const Vec xi_hat = kc > 0 ? Vec(Wct * xi_c) : Vec(0);

    FiberSequence out;
    out.eta = seq.eta;
    out.fibers.reserve(static_cast<size_t>(N));
    for (int f = 0; f < N; ++f) {
        // center: S^c(t+i-1) xi - sum_{k=i+1}^0 S^c(t+i-1-k) a_g - hat T^c(own)
        Vec qc(kc);
        if (kc > 0) {
            qc = Ec_pow_[static_cast<size_t>(f) + 1] * xi_hat;
            for (int gidx = 0; gidx < f; ++gidx) {
                const Vec a_g = ic[static_cast<size_t>(gidx)].col(n - 1);
                qc -= Ec_pow_[static_cast<size_t>(f - gidx) + 1] * a_g;
            }
            qc -= Ec_minus_ * ic[static_cast<size_t>(f)].col(n - 1);
        }
        // stable: sum_{k <= i-1, depth <= tail} S^s(t+i-1-k) b_g + T^s(own)
        Vec qs = Vec::Zero(ks);
        if (ks > 0) {
            const int gmax = std::min(N - 1, f + cfg_.tail_depth);
            for (int gidx = f + 1; gidx <= gmax; ++gidx) {
                const Vec b_g = is[static_cast<size_t>(gidx)].col(n - 1);
                qs += Es_pow_[static_cast<size_t>(gidx - f - 1)] * b_g;
            }
        }
        ControlledPath fiber;
        RowMat vals(n, m);
        fiber.yprime.resize(static_cast<size_t>(n));
        const ControlledPath& B = scaled[static_cast<size_t>(f)];
        for (int j = 0; j < n; ++j) {
            Vec y = Vec::Zero(m);
            if (kc > 0)
                y += Vc * (Ec_t_[static_cast<size_t>(j)] * qc + ic[static_cast<size_t>(f)].col(j));
            if (ks > 0)
                y += Vs * (Es_t_[static_cast<size_t>(j)] * qs + is[static_cast<size_t>(f)].col(j));
            vals.row(j) = y.transpose();
            fiber.yprime[static_cast<size_t>(j)] = G_.value_mat(B.y.at(j));
        }
        fiber.y = SampledPath(g, std::move(vals));
        fiber.alpha = alpha_;
        out.fibers.push_back(std::move(fiber));
    }
    return out;
}

FiberSequence lp_map_apply(const LpProblem& problem, const FiberSequence& seq, const Vec& xi_c) {
    return problem.apply(seq, xi_c);
}

namespace {

ManifoldChart fixed_point_impl(std::shared_ptr<const LpProblem> problem, const Vec& xi_c,
                               bool estimate_lipschitz);

double lipschitz_probe(const std::shared_ptr<const LpProblem>& problem, const Vec& xi_c,
                       const FiberSequence& gamma) {
    const Splitting& sp = problem->split();
    Vec xi2;
    if (xi_c.norm() > 0.0) {
        xi2 = 0.5 * xi_c;
    } else {
        xi2 = 1e-3 * sp.center.V.col(0);
    }
    ManifoldChart other = fixed_point_impl(problem, xi2, false);
    const double dist = problem->weighted_norm(gamma - other.gamma_seq);
    return dist / (xi_c - xi2).norm();
}

ManifoldChart fixed_point_impl(std::shared_ptr<const LpProblem> problem, const Vec& xi_c,
                               bool estimate_lipschitz) {
    const LpConfig& cfg = problem->config();
    const Splitting& sp = problem->split();
    const TimeGrid& g = problem->fiber_grid();
    const int m = sp.dim();
    const int d = problem->fiber_rough(0).dim();

    FiberSequence seq = FiberSequence::zero(cfg.window, g, m, d, problem->alpha(), cfg.gap.eta);
    double prev_delta = -1.0;
    double worst_ratio = 0.0;
    int bad_ratio_streak = 0;
    int iters = 0;
    bool converged = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        FiberSequence next = problem->apply(seq, xi_c);
        const double delta = problem->weighted_norm(next - seq);
        seq = std::move(next);
        ++iters;
        if (prev_delta > 1e-300) {
            const double ratio = delta / prev_delta;
            worst_ratio = std::max(worst_ratio, ratio);
            bad_ratio_streak = ratio >= 1.0 ? bad_ratio_streak + 1 : 0;
            if (bad_ratio_streak >= 3 && delta > cfg.tol)
                throw GapViolation("lp_fixed_point: no contraction (ratio >= 1)");
        }
        prev_delta = delta;
        if (delta <= cfg.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw ConvergenceFailure("lp_fixed_point: tolerance unreachable in max_iter");

    ManifoldChart chart;
    chart.problem = problem;
    chart.gamma_seq = seq;
    chart.xi_c = xi_c;
    chart.iterations = iters;
    chart.contraction_factor = worst_ratio;
    const int n = g.size();
    const ControlledPath& top = seq.fibers.front(); // fiber label -1
    chart.hc = sp.stable.P * top.y.at(n - 1);
    chart.center_recovery_error = (sp.center.P * top.y.at(n - 1) - sp.center.P * xi_c).norm();
    double mism = 0.0;
    for (int f = 0; f + 1 < seq.window(); ++f) {
        mism = std::max(mism, (seq.fibers[static_cast<size_t>(f)].y.at(0) -
                               seq.fibers[static_cast<size_t>(f + 1)].y.at(n - 1))
                                  .norm());
    }
    chart.endpoint_mismatch = mism;
    const double wnorm = problem->weighted_norm(seq);
    chart.tail_bound = sp.Ms * std::exp(-sp.beta * cfg.tail_depth) * wnorm /
                       (1.0 - std::exp(-(sp.beta + cfg.gap.eta)));
    if (estimate_lipschitz) {
        chart.L_gamma = lipschitz_probe(problem, xi_c, seq);
        const double R0 = problem->fiber_radius(0); // R(Theta_{-1} W)
        chart.rho = chart.L_gamma > 0.0
                        ? R0 / (2.0 * chart.L_gamma * std::exp(-cfg.gap.eta))
                        : std::numeric_limits<double>::infinity();
        chart.outside_ball = xi_c.norm() > chart.rho;
    }
    return chart;
}

} // namespace

ManifoldChart lp_fixed_point(std::shared_ptr<const LpProblem> problem, const Vec& xi_c,
                             bool estimate_lipschitz) {
    return fixed_point_impl(std::move(problem), xi_c, estimate_lipschitz);
}

Vec manifold_graph(const ManifoldChart& chart, const Vec& xi_c, bool* extrapolated) {
    if (extrapolated) *extrapolated = xi_c.norm() > chart.rho;
    if ((xi_c - chart.xi_c).norm() == 0.0) return chart.hc;
    std::vector<double> key(xi_c.data(), xi_c.data() + xi_c.size());
    {
        std::lock_guard<std::mutex> lock(chart.graph_cache->mu);
        auto it = chart.graph_cache->entries.find(key);
        if (it != chart.graph_cache->entries.end()) return it->second;
    }
    ManifoldChart other = fixed_point_impl(chart.problem, xi_c, false);
    std::lock_guard<std::mutex> lock(chart.graph_cache->mu);
    chart.graph_cache->entries.emplace(std::move(key), other.hc);
    return other.hc;
}

InvarianceReport verify_invariance(const ManifoldChart& chart, int steps, double tol,
                                   const SolveOptions& solver_opts) {
    InvarianceReport rep;
    const LpProblem& base = *chart.problem;
    const Splitting& sp = base.split();
    const LinearPart A(reconstruct_generator(sp));
    Vec state = sp.center.P * chart.xi_c + chart.hc;
    for (int j = 0; j < steps; ++j) {
        const RoughPath fiber = base.forward_fiber(j);
        const double R = base.forward_radius(j);
        const RdeSolution sol = solve_rde_truncated(A, base.drift(), base.diffusion(), state, fiber,
                                                    R, base.cutoff_profile(), solver_opts);
        const Vec phi = sol.u.y.at(sol.u.size() - 1);
        auto shifted = std::make_shared<LpProblem>(base.shifted(base.origin() + j + 1));
        ManifoldChart next = lp_fixed_point(shifted, Vec(sp.center.P * phi), true);
        InvarianceStep step;
        step.gap = (sp.stable.P * phi - next.hc).norm();
        step.ball_exit = (sp.center.P * phi).norm() > next.rho;
        step.state = phi;
        rep.max_gap = std::max(rep.max_gap, step.gap);
        if (step.gap > tol) rep.pass = false;
        rep.steps.push_back(std::move(step));
        state = phi;
    }
    return rep;
}

TangencyReport tangency_check(const ManifoldChart& chart, double probe, double slope_constant) {
    const Splitting& sp = chart.problem->split();
    TangencyReport rep;
    rep.probe = probe;
    const Vec h0 = manifold_graph(chart, Vec::Zero(sp.dim()));
    for (int c = 0; c < sp.center.k(); ++c) {
        const Vec dir = sp.center.V.col(c);
        const Vec hp = manifold_graph(chart, Vec(probe * dir));
        const Vec hm = manifold_graph(chart, Vec(-probe * dir));
        const double first = (hp - hm).norm() / (2.0 * probe);
        const double second = (hp - 2.0 * h0 + hm).norm() / (probe * probe);
        const Vec hp_half = manifold_graph(chart, Vec(0.5 * probe * dir));
        const double d_full = (hp - h0).norm() / probe;
        const double d_half = (hp_half - h0).norm() / (0.5 * probe);
        rep.first_difference.push_back(first);
        rep.second_difference.push_back(second);
        rep.one_sided_ratio.push_back(d_half > 0.0 ? d_full / d_half : 1.0);
        if (first > slope_constant * probe) rep.pass = false;
    }
    return rep;
}

} // namespace rcm
