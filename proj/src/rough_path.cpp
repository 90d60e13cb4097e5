#include "rcm/rough_path.hpp"

#include "rcm/kernels.hpp"
#include "rcm/philox.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <map>
#include <mutex>

namespace rcm {

double RoughPath::holder_first(PairPolicy policy) const {
    return holder_seminorm(first, alpha, policy);
}

double RoughPath::holder_second(PairPolicy policy) const {
    return two_param_seminorm(second, 2.0 * alpha, policy);
}

namespace {

// Chen-extend per-step tensors to all pairs:
// WW(i,j+1) = WW(i,j) + WW(j,j+1) + W(i,j) (x) W(j,j+1).
void chen_extend(const SampledPath& w, const std::vector<Mat>& step, TwoParamField& ww) {
    const int n = w.size();
    const int d = w.dim();
    Mat acc(d, d);
    for (int i = 0; i < n; ++i) {
        acc.setZero();
        Vec wi = w.at(i);
        for (int j = i; j + 1 < n; ++j) {
            const Vec wij = w.at(j) - wi;
            const Vec dwj = w.at(j + 1) - w.at(j);
            acc += step[static_cast<size_t>(j)] + wij * dwj.transpose();
            ww.at(i, j + 1) = acc;
        }
    }
}

} // namespace

RoughPath lift_smooth(const SampledPath& path, double alpha) {
    const int n = path.size();
    const int d = path.dim();
    std::vector<Mat> step(static_cast<size_t>(n - 1));
    for (int j = 0; j + 1 < n; ++j) {
        const Vec dw = path.at(j + 1) - path.at(j);
        step[static_cast<size_t>(j)] = 0.5 * dw * dw.transpose();
    }
    RoughPath rp;
    rp.first = path;
    rp.second = TwoParamField(path.grid, d, d);
    rp.alpha = alpha;
    chen_extend(path, step, rp.second);
    return rp;
}

RoughPath levy_area_dyadic(const SampledPath& path, int level, double alpha) {
    if (!path.grid.power_of_two_steps())
        throw std::invalid_argument("levy_area_dyadic: grid must be uniform with 2^k steps");
    const int steps = path.size() - 1;
    int max_level = 0;
    while ((1 << (max_level + 1)) <= steps) ++max_level;
    if (level < 0 || level > max_level)
        throw std::invalid_argument("levy_area_dyadic: level too deep for grid");
    const int block = steps >> level; // grid steps per dyadic segment
    SampledPath interp = path;
    for (int b = 0; b < (1 << level); ++b) {
        const int lo = b * block;
        const int hi = lo + block;
        for (int j = lo + 1; j < hi; ++j) {
            const double w = static_cast<double>(j - lo) / block;
            interp.values.row(j) = (1.0 - w) * path.values.row(lo) + w * path.values.row(hi);
        }
    }
    return lift_smooth(interp, alpha);
}

ChenReport check_chen(const RoughPath& rp, double tol, TriplePolicy policy) {
    const auto scan = kernels::chen_scan(rp.first.values.data(), rp.second.data(), rp.size(),
                                         rp.dim(), policy == TriplePolicy::Spanning);
    ChenReport rep;
    rep.max_residual = scan.max_residual;
    rep.s = scan.s;
    rep.u = scan.u;
    rep.t = scan.t;
    rep.pass = scan.max_residual <= tol;
    return rep;
}

RoughPath shift(const RoughPath& rp, double tau) {
    // W is rebased at time tau, so tau itself must be a grid point.
    const auto anchor = rp.grid().index_of(tau);
    if (!anchor) throw std::invalid_argument("shift: tau is not on the grid lattice");
    std::vector<double> pts(rp.grid().points());
    for (auto& t : pts) t -= tau;
    RoughPath out;
    RowMat vals = rp.first.values;
    vals.rowwise() -= rp.first.values.row(*anchor);
    out.first = SampledPath(TimeGrid(std::move(pts)), std::move(vals));
    out.second = rp.second;
    out.second.grid = out.first.grid;
    out.alpha = rp.alpha;
    out.chen_tol = rp.chen_tol;
    return out;
}

RoughPath restrict_window(const RoughPath& rp, double ta, double tb) {
    const auto ia = rp.grid().index_of(ta);
    const auto ib = rp.grid().index_of(tb);
    if (!ia || !ib || *ia >= *ib)
        throw std::invalid_argument("restrict_window: endpoints must be grid points with ta < tb");
    const int i0 = *ia, i1 = *ib;
    const int m = i1 - i0 + 1;
    std::vector<double> pts(rp.grid().points().begin() + i0, rp.grid().points().begin() + i1 + 1);
    RowMat vals = rp.first.values.middleRows(i0, m);
    RoughPath out;
    out.first = SampledPath(TimeGrid(std::move(pts)), std::move(vals));
    out.second = TwoParamField(out.first.grid, rp.second.rows(), rp.second.cols());
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) out.second.at(i, j) = rp.second.at(i0 + i, i0 + j);
    out.alpha = rp.alpha;
    out.chen_tol = rp.chen_tol;
    return out;
}

double rough_distance(const RoughPath& a, const RoughPath& b, PairPolicy policy) {
    if (!a.grid().same_times(b.grid()) || a.alpha != b.alpha || a.dim() != b.dim())
        throw std::invalid_argument("rough_distance: grid/alpha mismatch");
    SampledPath dfirst(a.first.grid, a.first.values - b.first.values);
    TwoParamField dsecond(a.grid(), a.second.rows(), a.second.cols());
    const int n = a.size();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) dsecond.at(i, j) = a.second.at(i, j) - b.second.at(i, j);
    return holder_seminorm(dfirst, a.alpha, policy) +
           two_param_seminorm(dsecond, 2.0 * a.alpha, policy);
}

FbmSampler::FbmSampler(TimeGrid grid, double hurst) : grid_(std::move(grid)), hurst_(hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("FbmSampler: hurst out of range");
    const auto zi = grid_.index_of(0.0);
    zero_index_ = zi ? *zi : -1;
    const int n = grid_.size();
    std::vector<int> active;
    for (int i = 0; i < n; ++i)
        if (i != zero_index_) active.push_back(i);
    const int m = static_cast<int>(active.size());
    Mat cov(m, m);
    const double h2 = 2.0 * hurst_;
    for (int a = 0; a < m; ++a) {
        const double ta = grid_[active[static_cast<size_t>(a)]];
        for (int b = a; b < m; ++b) {
            const double tb = grid_[active[static_cast<size_t>(b)]];
            const double c = 0.5 * (std::pow(std::abs(ta), h2) + std::pow(std::abs(tb), h2) -
                                    std::pow(std::abs(ta - tb), h2));
            cov(a, b) = c;
            cov(b, a) = c;
        }
    }
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) {
        // fBm covariances can lose numerical positive definiteness at large n;
        // a diagonal bump at the last-decimals scale restores it.
        const double bump = 1e-12 * cov.diagonal().maxCoeff();
        cov.diagonal().array() += bump;
        llt.compute(cov);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("FbmSampler: covariance not positive definite");
    }
    chol_ = llt.matrixL();
}

SampledPath FbmSampler::sample(std::uint64_t seed, int dimension) const {
    const int n = grid_.size();
    const int m = static_cast<int>(chol_.rows());
    RowMat vals = RowMat::Zero(n, dimension);
    Philox rng(seed);
    Vec z(m);
    for (int c = 0; c < dimension; ++c) {
        for (int k = 0; k < m; ++k) z(k) = rng.next_gaussian();
        const Vec b = chol_ * z;
        int pos = 0;
        for (int i = 0; i < n; ++i) {
            if (i == zero_index_) continue;
            vals(i, c) = b(pos++);
        }
    }
    return SampledPath(grid_, std::move(vals));
}

SampledPath sample_fbm(const FbmSpec& spec) {
    // Uniform with a dyadic step 2^j, so unit fibers carry 2^k steps each and
    // the dyadic Levy-area construction applies per fiber.
    bool dyadic_mesh = spec.grid.uniform();
    if (dyadic_mesh) {
        const double h = spec.grid.span() / (spec.grid.size() - 1);
        const double lg = std::log2(h);
        dyadic_mesh = std::abs(lg - std::round(lg)) <= 1e-9;
    }
    if (!dyadic_mesh)
        throw std::invalid_argument("sample_fbm: grid must be uniform with a 2^j step");
    if (!(spec.hurst > 1.0 / 3.0 && spec.hurst <= 0.5))
        throw std::invalid_argument("sample_fbm: hurst must be in (1/3, 1/2]");
    static std::mutex mu;
    static std::map<std::pair<std::string, double>, std::shared_ptr<FbmSampler>> cache;
    std::string key;
    key.reserve(64);
    key += std::to_string(spec.grid.size());
    key += ':';
    key += std::to_string(spec.grid.t0());
    key += ':';
    key += std::to_string(spec.grid.t1());
    std::shared_ptr<FbmSampler> sampler;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[{key, spec.hurst}];
        if (!slot) slot = std::make_shared<FbmSampler>(spec.grid, spec.hurst);
        sampler = slot;
    }
    return sampler->sample(spec.seed, spec.dimension);
}

TemperednessReport temperedness_diagnostic(const std::vector<int>& fibers,
                                           const std::vector<double>& samples,
                                           double threshold) {
    if (fibers.size() != samples.size() || fibers.size() < 3)
        throw std::invalid_argument("temperedness_diagnostic: need at least 3 fibers");
    const int n = static_cast<int>(fibers.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        const double x = std::abs(static_cast<double>(fibers[static_cast<size_t>(k)]));
        const double y = std::max(std::log(samples[static_cast<size_t>(k)]), 0.0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    TemperednessReport rep;
    const double denom = n * sxx - sx * sx;
    rep.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    rep.intercept = (sy - rep.slope * sx) / n;
    rep.pass = rep.slope <= threshold;
    return rep;
}

} // namespace rcm
