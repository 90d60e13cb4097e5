#include "rcm/controlled.hpp"

#include "rcm/kernels.hpp"

#include <cmath>

namespace rcm {

ControlledPath ControlledPath::zero(const TimeGrid& grid, int m, int d, double alpha) {
    ControlledPath cp;
    cp.y = SampledPath(grid, RowMat::Zero(grid.size(), m));
    cp.yprime.assign(static_cast<size_t>(grid.size()), Mat::Zero(m, d));
    cp.alpha = alpha;
    return cp;
}

ControlledPath ControlledPath::constant(const TimeGrid& grid, const Vec& y0, const Mat& yp0,
                                        double alpha) {
    ControlledPath cp;
    RowMat vals(grid.size(), y0.size());
    vals.rowwise() = y0.transpose();
    cp.y = SampledPath(grid, std::move(vals));
    cp.yprime.assign(static_cast<size_t>(grid.size()), yp0);
    cp.alpha = alpha;
    return cp;
}

ControlledPath operator-(const ControlledPath& a, const ControlledPath& b) {
    ControlledPath out = a;
    out.y.values -= b.y.values;
    for (size_t i = 0; i < out.yprime.size(); ++i) out.yprime[i] -= b.yprime[i];
    return out;
}

ControlledPath operator+(const ControlledPath& a, const ControlledPath& b) {
    ControlledPath out = a;
    out.y.values += b.y.values;
    for (size_t i = 0; i < out.yprime.size(); ++i) out.yprime[i] += b.yprime[i];
    return out;
}

ControlledPath scale(const ControlledPath& a, double c) {
    ControlledPath out = a;
    out.y.values *= c;
    for (auto& m : out.yprime) m *= c;
    return out;
}

namespace {

RowMat flatten_yprime(const std::vector<Mat>& yprime) {
    const int n = static_cast<int>(yprime.size());
    const int m = static_cast<int>(yprime.front().rows());
    const int d = static_cast<int>(yprime.front().cols());
    RowMat flat(n, m * d);
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < d; ++b) flat(i, a * d + b) = yprime[static_cast<size_t>(i)](a, b);
    }
    return flat;
}

std::vector<double> gap_weights_sq(const TimeGrid& g, double expo) {
    const int n = g.size();
    std::vector<double> w(static_cast<size_t>(n - 1));
    const double h = g.span() / (n - 1);
    for (int k = 1; k < n; ++k) {
        const double p = std::pow(h * k, -expo);
        w[static_cast<size_t>(k - 1)] = p * p;
    }
    return w;
}

} // namespace

double remainder_seminorm(const ControlledPath& cp, const RoughPath& rp, PairPolicy policy) {
    if (!cp.y.grid.same_times(rp.grid()))
        throw std::invalid_argument("remainder_seminorm: grid mismatch");
    const int n = cp.size();
    const int m = cp.state_dim();
    const int d = rp.dim();
    if (n < 2) return 0.0;
    const RowMat dflat = flatten_yprime(cp.yprime);
    if (cp.y.grid.uniform()) {
        const auto w = gap_weights_sq(cp.y.grid, 2.0 * cp.alpha);
        if (policy == PairPolicy::AllPairs) {
            return kernels::max_scaled_remainder(cp.y.values.data(), dflat.data(),
                                                 rp.first.values.data(), n, m, d, w.data());
        }
        return kernels::max_scaled_remainder_dyadic(cp.y.values.data(), dflat.data(),
                                                    rp.first.values.data(), n, m, d, w.data());
    }
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double gap = cp.y.grid[j] - cp.y.grid[i];
            if (policy == PairPolicy::DyadicPairs) {
                const double lg = std::log2(gap / cp.y.grid.mesh());
                if (std::abs(lg - std::round(lg)) > 1e-9) continue;
            }
            const Vec r = cp.y.increment(i, j) -
                          cp.yprime[static_cast<size_t>(i)] * rp.first.increment(i, j);
            best = std::max(best, r.norm() * std::pow(gap, -2.0 * cp.alpha));
        }
    }
    return best;
}

ControlledNorms controlled_norms(const ControlledPath& cp, const RoughPath& rp, PairPolicy policy) {
    if (!cp.y.grid.same_times(rp.grid()))
        throw std::invalid_argument("controlled_norms: grid mismatch");
    ControlledNorms out;
    SampledPath ypflat(cp.y.grid, flatten_yprime(cp.yprime));
    out.gubinelli_holder = holder_seminorm(ypflat, cp.alpha, policy);
    out.remainder = remainder_seminorm(cp, rp, policy);
    out.seminorm = out.gubinelli_holder + out.remainder;
    out.norm = cp.y.at(0).norm() + cp.yprime.front().norm() + out.seminorm;
    return out;
}

SmoothCoefficient::SmoothCoefficient(std::string name, int in_dim, int out_rows, int out_cols,
                                     ValueFn value, JacobianFn jacobian, double c1b, double c2b,
                                     double c3b, bool zero_value, bool zero_jacobian,
                                     bool zero_hessian)
    : name_(std::move(name)),
      in_(in_dim),
      rows_(out_rows),
      cols_(out_cols),
      value_(std::move(value)),
      jacobian_(std::move(jacobian)),
      c1b_(c1b),
      c2b_(c2b),
      c3b_(c3b),
      zero_value_(zero_value),
      zero_jacobian_(zero_jacobian),
      zero_hessian_(zero_hessian) {
    const Vec origin = Vec::Zero(in_);
    if (zero_value_ && value_(origin).norm() > 1e-12)
        throw std::invalid_argument("SmoothCoefficient: flagged G(0)=0 but |G(0)| > 1e-12");
    if (zero_jacobian_ && jacobian_(origin).norm() > 1e-12)
        throw std::invalid_argument("SmoothCoefficient: flagged DG(0)=0 but |DG(0)| > 1e-12");
    if (zero_hessian_) {
        // Central difference of the Jacobian along each axis.
        const double eps = 1e-5;
        for (int k = 0; k < in_; ++k) {
            Vec e = Vec::Zero(in_);
            e(k) = eps;
            const double diff = (jacobian_(e) - jacobian_(-e)).norm() / (2.0 * eps);
            if (diff > 1e-6)
                throw std::invalid_argument("SmoothCoefficient: flagged D2G(0)=0 violated");
        }
    }
}

Mat SmoothCoefficient::value_mat(const Vec& x) const {
    const Vec v = value_(x);
    Mat out(rows_, cols_);
    for (int a = 0; a < rows_; ++a)
        for (int b = 0; b < cols_; ++b) out(a, b) = v(a * cols_ + b);
    return out;
}

Mat SmoothCoefficient::dir_deriv(const Vec& x, const Vec& v) const {
    const Vec dv = jacobian_(x) * v;
    Mat out(rows_, cols_);
    for (int a = 0; a < rows_; ++a)
        for (int b = 0; b < cols_; ++b) out(a, b) = dv(a * cols_ + b);
    return out;
}

SmoothCoefficient SmoothCoefficient::zero(int in_dim, int rows, int cols) {
    return SmoothCoefficient(
        "zero", in_dim, rows, cols, [rows, cols](const Vec&) { return Vec::Zero(rows * cols); },
        [in_dim, rows, cols](const Vec&) { return Mat::Zero(rows * cols, in_dim); }, 0.0, 0.0, 0.0,
        true, true, true);
}

SmoothCoefficient SmoothCoefficient::linear(const Mat& B) {
    const int in = static_cast<int>(B.cols());
    const int out = static_cast<int>(B.rows());
    return SmoothCoefficient(
        "linear", in, out, 1, [B](const Vec& x) { return Vec(B * x); },
        [B](const Vec&) { return B; }, B.norm(), 0.0, 0.0, true, false, true);
}

namespace {

double exp_profile(double x) {
    auto g = [](double v) { return v > 0.0 ? std::exp(-1.0 / v) : 0.0; };
    if (x <= 0.5) return 1.0;
    if (x >= 1.0) return 0.0;
    const double num = g(1.0 - x);
    return num / (g(x - 0.5) + num);
}

} // namespace

CutoffFunction::CutoffFunction() {
    // Finite-difference check of |f'''| on the transition band.
    const double h = 1e-3;
    double bound = 0.0;
    for (double x = 0.51; x < 0.99; x += 0.005) {
        const double d3 = (exp_profile(x + 2 * h) - 2 * exp_profile(x + h) + 2 * exp_profile(x - h) -
                           exp_profile(x - 2 * h)) /
                          (2 * h * h * h);
        if (!std::isfinite(d3)) throw std::runtime_error("CutoffFunction: profile not C^3");
        bound = std::max(bound, std::abs(d3));
    }
    d3_bound_ = bound;
}

double CutoffFunction::operator()(double x) const { return exp_profile(x); }

double sewing_constant(double alpha) { return 1.0 / (1.0 - std::pow(2.0, 1.0 - 3.0 * alpha)); }

GubinelliResult gubinelli_integral(const ControlledPath& cp, const RoughPath& rp, int i0, int i1,
                                   const std::vector<int>* partition) {
    if (!cp.y.grid.same_times(rp.grid()))
        throw std::invalid_argument("gubinelli_integral: grid mismatch");
    if (i0 < 0 || i1 >= cp.size() || i0 > i1)
        throw std::invalid_argument("gubinelli_integral: bad index range");
    const int m = cp.state_dim();
    const int d = rp.dim();
    Mat acc = Mat::Zero(m, d);
    auto add_step = [&](int u, int v) {
        acc.noalias() += cp.y.at(u) * rp.first.increment(u, v).transpose();
        acc.noalias() += cp.yprime[static_cast<size_t>(u)] * rp.second.at(u, v);
    };
    if (partition) {
        if (partition->size() < 2 || partition->front() != i0 || partition->back() != i1)
            throw std::invalid_argument("gubinelli_integral: partition must span [i0, i1]");
        for (size_t k = 0; k + 1 < partition->size(); ++k)
            add_step((*partition)[k], (*partition)[k + 1]);
    } else {
        for (int u = i0; u < i1; ++u) add_step(u, u + 1);
    }
    GubinelliResult res;
    res.value = std::move(acc);
    const double len = rp.grid()[i1] - rp.grid()[i0];
    const double wa = rp.holder_first();
    const double wwa = rp.holder_second();
    ControlledNorms norms = controlled_norms(cp, rp);
    res.error_estimate = sewing_constant(cp.alpha) *
                         (wa * norms.remainder + wwa * norms.gubinelli_holder) *
                         std::pow(len, 3.0 * cp.alpha);
    return res;
}

GubinelliResult gubinelli_integral(const ControlledPath& cp, const RoughPath& rp, double s,
                                   double t) {
    const auto is = rp.grid().index_of(s);
    const auto it = rp.grid().index_of(t);
    if (!is || !it) throw std::invalid_argument("gubinelli_integral: s,t must be grid points");
    return gubinelli_integral(cp, rp, *is, *it);
}

ControlledPath compose_smooth(const SmoothCoefficient& G, const ControlledPath& cp,
                              const RoughPath& rp) {
    (void)rp;
    const int n = cp.size();
    ControlledPath out;
    RowMat vals(n, G.out_dim());
    out.yprime.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Vec yi = cp.y.at(i);
        vals.row(i) = G.value(yi).transpose();
        out.yprime[static_cast<size_t>(i)] = G.jacobian(yi) * cp.yprime[static_cast<size_t>(i)];
    }
    out.y = SampledPath(cp.y.grid, std::move(vals));
    out.alpha = cp.alpha;
    return out;
}

double cutoff_factor(const ControlledPath& cp, const RoughPath& rp, double R,
                     const CutoffFunction& f, PairPolicy policy) {
    if (!(R > 0.0)) throw std::invalid_argument("cutoff: R must be > 0");
    const double nrm = controlled_norms(cp, rp, policy).norm;
    return f(nrm / R);
}

ControlledPath cutoff(const ControlledPath& cp, const RoughPath& rp, double R,
                      const CutoffFunction& f, PairPolicy policy) {
    return scale(cp, cutoff_factor(cp, rp, R, f, policy));
}

GapBound lipschitz_gap_bound(const SmoothCoefficient& H, const Vec& x, const Vec& y) {
    if (!H.zero_value() || !H.zero_jacobian())
        throw std::invalid_argument("lipschitz_gap_bound: needs H(0)=0 and DH(0)=0 flags");
    GapBound gb;
    gb.bound = H.c2b() * std::max(x.norm(), y.norm()) * (x - y).norm();
    gb.actual = (H.value(x) - H.value(y)).norm();
    gb.holds = gb.actual <= gb.bound * (1.0 + 1e-12) + 1e-300;
    return gb;
}

} // namespace rcm
