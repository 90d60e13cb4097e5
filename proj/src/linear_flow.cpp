#include "rcm/linear_flow.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <lapacke.h>

#include <cmath>
#include <map>

namespace rcm {

namespace {

double operator_norm(const Mat& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

} // namespace

LinearPart::LinearPart(Mat a) : A(std::move(a)) {
    if (A.rows() != A.cols()) throw std::invalid_argument("LinearPart: matrix must be square");
    opnorm = operator_norm(A);
}

Mat matrix_exponential(const Mat& A, double t) { return Mat((t * A).exp()); }
Mat matrix_exponential(const LinearPart& A, double t) { return matrix_exponential(A.A, t); }

Vec SpectralBlock::apply_semigroup(double t, const Vec& x) const {
    if (empty()) return Vec::Zero(x.size());
    return V * (matrix_exponential(Ar, t) * (W.transpose() * x));
}

namespace {

// dgees select callbacks; LAPACKE takes plain function pointers, so the
// tolerance travels through file statics (splitting is single-threaded).
double g_ctol = 1e-8;
lapack_logical select_center(const double* re, const double*) {
    return std::abs(*re) <= g_ctol ? 1 : 0;
}
lapack_logical select_stable(const double* re, const double*) { return *re < -g_ctol ? 1 : 0; }
lapack_logical select_unstable(const double* re, const double*) { return *re > g_ctol ? 1 : 0; }

SpectralBlock schur_block(const Mat& A, LAPACK_D_SELECT2 select) {
    const int n = static_cast<int>(A.rows());
    Mat T = A; // overwritten with the sorted Schur form
    Mat Q(n, n);
    std::vector<double> wr(static_cast<size_t>(n)), wi(static_cast<size_t>(n));
    lapack_int sdim = 0;
    const lapack_int info = LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select, n, T.data(), n,
                                          &sdim, wr.data(), wi.data(), Q.data(), n);
    if (info != 0) throw std::runtime_error("spectral_split: dgees failed");
    const int k = static_cast<int>(sdim);
    SpectralBlock blk;
    blk.V = Q.leftCols(k);
    blk.Ar = T.topLeftCorner(k, k);
    if (k == 0 || k == n) {
        blk.W = blk.V;
        blk.P = k == n ? Mat(Mat::Identity(n, n)) : Mat(Mat::Zero(n, n));
        return blk;
    }
    // Block-diagonalize: T11 X - X T22 = -T12, then P = Q1 (Q1^T - X Q2^T).
    Mat C = -T.topRightCorner(k, n - k);
    double scale = 1.0;
    const lapack_int info2 =
        LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'N', 'N', -1, k, n - k, T.data(), n,
                       T.block(k, k, n - k, n - k).eval().data(), n - k, C.data(), k, &scale);
    if (info2 < 0) throw std::runtime_error("spectral_split: dtrsyl failed");
    const Mat X = C / scale;
    blk.W = blk.V - Q.rightCols(n - k) * X.transpose();
    blk.P = blk.V * blk.W.transpose();
    return blk;
}

} // namespace

Splitting spectral_split(const LinearPart& A, double center_tol, SplitMode mode, double margin) {
    const int n = A.dim();
    Eigen::EigenSolver<Mat> es(A.A);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectral_split: eigensolver failed");
    double max_center = 0.0;
    double min_stable = std::numeric_limits<double>::infinity();
    double min_unstable = std::numeric_limits<double>::infinity();
    bool any_stable = false, any_unstable = false;
    for (int i = 0; i < n; ++i) {
        const double re = es.eigenvalues()(i).real();
        if (std::abs(re) <= center_tol) {
            max_center = std::max(max_center, std::abs(re));
        } else if (re < 0.0) {
            any_stable = true;
            min_stable = std::min(min_stable, -re);
        } else {
            any_unstable = true;
            min_unstable = std::min(min_unstable, re);
        }
    }
    if (mode == SplitMode::Dichotomy && any_unstable)
        throw SpectrumViolation("spectral_split: eigenvalue with positive real part in dichotomy mode");

    g_ctol = center_tol;
    Splitting sp;
    sp.center_tol = center_tol;
    sp.trichotomy = mode == SplitMode::Trichotomy;
    sp.center = schur_block(A.A, &select_center);
    sp.stable = schur_block(A.A, &select_stable);
    if (sp.trichotomy) {
        sp.unstable = schur_block(A.A, &select_unstable);
    } else {
        sp.unstable.V = Mat::Zero(n, 0);
        sp.unstable.W = Mat::Zero(n, 0);
        sp.unstable.Ar = Mat::Zero(0, 0);
        sp.unstable.P = Mat::Zero(n, n);
    }
    if (!any_stable) throw std::invalid_argument("spectral_split: no stable spectrum");
    // Normal blocks satisfy the pure exponential bound at the spectral
    // abscissa itself; the margin is only needed against non-normal
    // transients.
    const auto is_normal = [](const Mat& M) {
        if (M.rows() == 0) return true;
        const double sc = std::max(1.0, M.squaredNorm());
        return (M * M.transpose() - M.transpose() * M).norm() <= 1e-10 * sc;
    };
    sp.gamma = max_center < 1e-12 ? 0.0 : max_center;
    sp.beta = min_stable * (is_normal(sp.stable.Ar) ? 1.0 : 1.0 - margin);
    sp.rho2 = sp.gamma;
    sp.rho3 = sp.beta;
    sp.rho1 = any_unstable
                  ? min_unstable * (is_normal(sp.unstable.Ar) ? 1.0 : 1.0 - margin)
                  : 0.0;
    return sp;
}

Splitting dichotomy_constants(Splitting split, const LinearPart& A, double horizon, int samples) {
    (void)A;
    double mc = 1.0, ms = 1.0, mu = 1.0;
    for (int i = 0; i <= samples; ++i) {
        const double t = horizon * i / samples;
        if (!split.center.empty())
            mc = std::max(mc, operator_norm(matrix_exponential(split.center.Ar, -t)) *
                                  std::exp(split.gamma * t));
        if (!split.stable.empty())
            ms = std::max(ms, operator_norm(matrix_exponential(split.stable.Ar, t)) *
                                  std::exp(split.beta * t));
        if (!split.unstable.empty())
            mu = std::max(mu, operator_norm(matrix_exponential(split.unstable.Ar, -t)) *
                                  std::exp(split.rho1 * t));
    }
    split.Mc = mc;
    split.Ms = ms;
    split.Mu = mu;
    split.fit_horizon = horizon;
    split.fit_samples = samples;
    return split;
}

double group_holder_constant(const Mat& A, double alpha, int grid_points) {
    const int n = static_cast<int>(A.rows());
    const TimeGrid g = make_uniform_grid(grid_points, 0.0, 1.0);
    double best = 0.0;
    for (int b = 0; b < n; ++b) {
        Vec e = Vec::Zero(n);
        e(b) = 1.0;
        RowMat vals(grid_points, n);
        for (int i = 0; i < grid_points; ++i) vals.row(i) = (matrix_exponential(A, g[i]) * e).transpose();
        SampledPath p(g, std::move(vals));
        best = std::max(best, sup_norm(p) + holder_seminorm(p, 2.0 * alpha, PairPolicy::AllPairs));
    }
    return best;
}

ExpStepper make_exp_stepper(const Mat& A, double h) {
    const int n = static_cast<int>(A.rows());
    ExpStepper st;
    if (n == 0) return st;
    Mat aug = Mat::Zero(3 * n, 3 * n);
    aug.topLeftCorner(n, n) = h * A;
    aug.block(0, n, n, n) = Mat::Identity(n, n);
    aug.block(n, 2 * n, n, n) = Mat::Identity(n, n);
    const Mat e = aug.exp();
    st.E = e.topLeftCorner(n, n);
    st.Phi1 = e.block(0, n, n, n);
    st.Phi1h = h * st.Phi1;
    st.Phi2h = h * e.block(0, 2 * n, n, n);
    return st;
}

ControlledPath semigroup_convolve_drift(const LinearPart& A, const SmoothCoefficient& F,
                                        const ControlledPath& cp, const Vec& xi, QuadRule rule) {
    const int n = cp.size();
    const int m = A.dim();
    const int d = cp.noise_dim();
    std::vector<Vec> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = F.value(cp.y.at(i));
    RowMat vals(n, m);
    Vec v = xi;
    vals.row(0) = v.transpose();
    std::map<double, ExpStepper> steppers;
    for (int k = 0; k + 1 < n; ++k) {
        const double h = cp.y.grid.dt(k);
        auto it = steppers.find(h);
        if (it == steppers.end()) it = steppers.emplace(h, make_exp_stepper(A.A, h)).first;
        const ExpStepper& st = it->second;
        v = st.E * v + st.Phi1h * g[static_cast<size_t>(k)];
        if (rule == QuadRule::Trapezoid)
            v += st.Phi2h * (g[static_cast<size_t>(k + 1)] - g[static_cast<size_t>(k)]);
        vals.row(k + 1) = v.transpose();
    }
    ControlledPath out;
    out.y = SampledPath(cp.y.grid, std::move(vals));
    out.yprime.assign(static_cast<size_t>(n), Mat::Zero(m, d));
    out.alpha = cp.alpha;
    return out;
}

Vec rough_one_step(const ControlledPath& integrand, const RoughPath& rp, int u, int m) {
    const int d = rp.dim();
    const Vec dw = rp.first.increment(u, u + 1);
    const auto ww = rp.second.at(u, u + 1);
    const auto& yrow = integrand.y.values;
    const Mat& T = integrand.yprime[static_cast<size_t>(u)]; // (m*d) x d
    Vec out(m);
    for (int a = 0; a < m; ++a) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) acc += yrow(u, a * d + c) * dw(c);
        for (int c = 0; c < d; ++c)
            for (int b = 0; b < d; ++b) acc += T(a * d + c, b) * ww(b, c);
        out(a) = acc;
    }
    return out;
}

ControlledPath semigroup_convolve_rough(const LinearPart& A, const ControlledPath& integrand,
                                        const RoughPath& rp) {
    if (!integrand.y.grid.same_times(rp.grid()))
        throw std::invalid_argument("semigroup_convolve_rough: grid mismatch");
    const int n = integrand.size();
    const int d = rp.dim();
    const int m = A.dim();
    if (integrand.state_dim() != m * d)
        throw std::invalid_argument("semigroup_convolve_rough: integrand must be map-valued (m*d)");
    RowMat vals = RowMat::Zero(n, m);
    // One compensated sum per output time via the semigroup recursion; the
    // one-step term carries the step-averaged weight phi1(hA), which matches
    // S(t-u) to the order the sewing bound controls and integrates smooth
    // data to second order.
    std::map<double, ExpStepper> steppers;
    Vec acc = Vec::Zero(m);
    for (int k = 0; k + 1 < n; ++k) {
        const double h = integrand.y.grid.dt(k);
        auto it = steppers.find(h);
        if (it == steppers.end()) it = steppers.emplace(h, make_exp_stepper(A.A, h)).first;
        acc = it->second.E * acc + it->second.Phi1 * rough_one_step(integrand, rp, k, m);
        vals.row(k + 1) = acc.transpose();
    }
    ControlledPath out;
    out.y = SampledPath(integrand.y.grid, std::move(vals));
    out.yprime.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Mat M(m, d);
        for (int a = 0; a < m; ++a)
            for (int c = 0; c < d; ++c) M(a, c) = integrand.y.values(i, a * d + c);
        out.yprime[static_cast<size_t>(i)] = std::move(M);
    }
    out.alpha = integrand.alpha;
    return out;
}

} // namespace rcm
