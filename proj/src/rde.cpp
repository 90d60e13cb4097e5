#include "rcm/rde.hpp"

#include <cmath>

namespace rcm {

namespace {

struct IterationTrace {
    std::vector<double> residuals;
    double worst_ratio = 0.0;
    bool converged = false;
    double cutoff_scale = 1.0;
};

// One Picard pass: U -> S(.) xi + int S F_R(U) dr + int S G_R(U) dW with the
// Gubinelli derivative maintained as G_R(U).
ControlledPath picard_step(const LinearPart& A, const SmoothCoefficient& F,
                           const SmoothCoefficient& G, const Vec& xi, const RoughPath& rp,
                           const ControlledPath& u, double cutoff_scale, const SolveOptions& opts) {
    const ControlledPath base = cutoff_scale == 1.0 ? u : scale(u, cutoff_scale);
    const ControlledPath integrand = compose_smooth(G, base, rp);
    ControlledPath drift = semigroup_convolve_drift(A, F, base, xi, opts.quadrature);
    ControlledPath rough = semigroup_convolve_rough(A, integrand, rp);
    ControlledPath next = drift + rough;
    // U' = G_R(U): the value of the diffusion coefficient along the path.
    for (int i = 0; i < next.size(); ++i)
        next.yprime[static_cast<size_t>(i)] = G.value_mat(base.y.at(i));
    return next;
}

IterationTrace iterate_window(const LinearPart& A, const SmoothCoefficient& F,
                              const SmoothCoefficient& G, const Vec& xi, const RoughPath& rp,
                              const TruncationPolicy& trunc, const CutoffFunction* f,
                              const SolveOptions& opts, ControlledPath& u) {
    IterationTrace trace;
    u = ControlledPath::constant(rp.grid(), xi, G.value_mat(xi), rp.alpha);
    double prev_res = -1.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        double scale_factor = 1.0;
        if (trunc.kind != TruncationPolicy::Kind::None) {
            const double nrm = controlled_norms(u, rp, opts.norm_policy).norm;
            scale_factor = (*f)(nrm / trunc.R);
        }
        ControlledPath next = picard_step(A, F, G, xi, rp, u, scale_factor, opts);
        if (!next.y.values.allFinite()) throw NumericalFailure("solve_rde: NaN/overflow in iterate");
        const ControlledPath diff = next - u;
        const ControlledNorms dn = controlled_norms(diff, rp, opts.norm_policy);
        const double res = dn.norm;
        trace.residuals.push_back(res);
        trace.cutoff_scale = scale_factor;
        u = std::move(next);
        if (prev_res > 0.0 && prev_res > 1e-300)
            trace.worst_ratio = std::max(trace.worst_ratio, res / prev_res);
        if (res <= opts.tolerance * 0.1) {
            trace.converged = true;
            return trace;
        }
        // Two full passes before judging the contraction factor.
        if (it >= 2 && prev_res > 0.0 && res / prev_res > opts.contraction_threshold &&
            res > opts.tolerance) {
            trace.converged = false;
            return trace;
        }
        prev_res = res;
    }
    trace.converged = trace.residuals.back() <= opts.tolerance;
    return trace;
}

void solve_recursive(const LinearPart& A, const SmoothCoefficient& F, const SmoothCoefficient& G,
                     const Vec& xi, const RoughPath& rp, int i0, int i1,
                     const TruncationPolicy& trunc, const CutoffFunction* f,
                     const SolveOptions& opts, RdeSolution& out, Vec& terminal) {
    // Rebase the window at its left end (times and W); skip the copy when the
    // input already is a whole rebased window.
    const bool whole = i0 == 0 && i1 == rp.size() - 1 && std::abs(rp.grid().t0()) < 1e-15 &&
                       rp.first.values.row(0).norm() == 0.0;
    RoughPath storage;
    if (!whole) storage = shift(restrict_window(rp, rp.grid()[i0], rp.grid()[i1]), rp.grid()[i0]);
    const RoughPath& local = whole ? rp : storage;
    ControlledPath u;
    const IterationTrace trace =
        iterate_window(A, F, G, xi, local, trunc, f, opts, u);
    if (trace.converged) {
        out.residuals.insert(out.residuals.end(), trace.residuals.begin(), trace.residuals.end());
        out.iterations += static_cast<int>(trace.residuals.size());
        out.contraction_factor = std::max(out.contraction_factor, trace.worst_ratio);
        out.truncation_scale = trace.cutoff_scale;
        out.subintervals.emplace_back(rp.grid()[i0], rp.grid()[i1]);
        out.subinterval_norms.push_back(controlled_norms(u, local, opts.norm_policy).norm);
        const int off = i0;
        for (int i = i0; i <= i1; ++i) {
            out.u.y.values.row(i) = u.y.values.row(i - off);
            out.u.yprime[static_cast<size_t>(i)] = u.yprime[static_cast<size_t>(i - off)];
        }
        terminal = u.y.at(u.size() - 1);
        return;
    }
    if (i1 - i0 < 2 * opts.min_cells) {
        throw ConvergenceFailure(
            "solve_rde: no contraction at the subdivision floor; last residual " +
            std::to_string(trace.residuals.empty() ? -1.0 : trace.residuals.back()));
    }
    const int mid = i0 + (i1 - i0) / 2;
    Vec mid_value;
    solve_recursive(A, F, G, xi, rp, i0, mid, trunc, f, opts, out, mid_value);
    solve_recursive(A, F, G, mid_value, rp, mid, i1, trunc, f, opts, out, terminal);
}

RdeSolution solve_impl(const LinearPart& A, const SmoothCoefficient& F, const SmoothCoefficient& G,
                       const Vec& xi, const RoughPath& rp, const TruncationPolicy& trunc,
                       const CutoffFunction* f, const SolveOptions& opts) {
    if (opts.tolerance <= 0.0 || opts.max_iterations < 1)
        throw std::invalid_argument("solve_rde: bad options");
    RdeSolution sol;
    sol.u = ControlledPath::zero(rp.grid(), A.dim(), rp.dim(), rp.alpha);
    Vec terminal;
    solve_recursive(A, F, G, xi, rp, 0, rp.size() - 1, trunc, f, opts, sol, terminal);
    sol.converged = true;
    return sol;
}

} // namespace

RdeSolution solve_rde(const LinearPart& A, const SmoothCoefficient& F, const SmoothCoefficient& G,
                      const Vec& xi, const RoughPath& rp, const SolveOptions& opts) {
    TruncationPolicy none;
    return solve_impl(A, F, G, xi, rp, none, nullptr, opts);
}

RdeSolution solve_rde_truncated(const LinearPart& A, const SmoothCoefficient& F,
                                const SmoothCoefficient& G, const Vec& xi, const RoughPath& rp,
                                double R, const CutoffFunction& f, const SolveOptions& opts) {
    if (!(R > 0.0)) throw std::invalid_argument("solve_rde_truncated: R must be > 0");
    TruncationPolicy trunc;
    trunc.kind = TruncationPolicy::Kind::Fixed;
    trunc.R = R;
    return solve_impl(A, F, G, xi, rp, trunc, &f, opts);
}

double mild_residual(const LinearPart& A, const SmoothCoefficient& F, const SmoothCoefficient& G,
                     const Vec& xi, const RoughPath& rp, const ControlledPath& u, QuadRule rule) {
    const ControlledPath integrand = compose_smooth(G, u, rp);
    const ControlledPath drift = semigroup_convolve_drift(A, F, u, xi, rule);
    const ControlledPath rough = semigroup_convolve_rough(A, integrand, rp);
    double worst = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        const double gap = (drift.y.at(i) + rough.y.at(i) - u.y.at(i)).norm();
        worst = std::max(worst, gap);
    }
    return worst;
}

CocycleReport cocycle_check(const LinearPart& A, const SmoothCoefficient& F,
                            const SmoothCoefficient& G, const Vec& xi, const RoughPath& rp,
                            double t, double tau, double tol, const SolveOptions& opts) {
    const double t0 = rp.grid().t0();
    if (!rp.grid().index_of(t0 + tau) || !rp.grid().index_of(t0 + tau + t))
        throw std::invalid_argument("cocycle_check: t, tau must be on the lattice");
    CocycleReport rep;
    const RoughPath whole = restrict_window(rp, t0, t0 + tau + t);
    const RdeSolution full = solve_rde(A, F, G, xi, whole, opts);
    rep.one_shot = full.u.y.at(full.u.size() - 1);
    if (tau == 0.0) {
        rep.two_shot = rep.one_shot;
        rep.gap = 0.0;
        rep.pass = true;
        return rep;
    }
    const RoughPath head = restrict_window(rp, t0, t0 + tau);
    const RdeSolution first = solve_rde(A, F, G, xi, head, opts);
    const Vec mid = first.u.y.at(first.u.size() - 1);
    const RoughPath shifted = shift(restrict_window(rp, t0 + tau, t0 + tau + t), t0 + tau);
    const RdeSolution second = solve_rde(A, F, G, mid, shifted, opts);
    rep.two_shot = second.u.y.at(second.u.size() - 1);
    rep.gap = (rep.one_shot - rep.two_shot).norm();
    rep.pass = rep.gap <= tol;
    return rep;
}

} // namespace rcm
