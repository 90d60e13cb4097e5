#include "rcm/grid.hpp"

#include "rcm/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rcm {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw std::invalid_argument("TimeGrid: need at least 2 points");
    mesh_ = 0.0;
    for (size_t i = 1; i < points_.size(); ++i) {
        const double gap = points_[i] - points_[i - 1];
        if (!(gap > 0.0)) throw std::invalid_argument("TimeGrid: points must be strictly increasing");
        mesh_ = std::max(mesh_, gap);
    }
}

bool TimeGrid::uniform(double rel_tol) const {
    const double h = span() / (size() - 1);
    for (int i = 0; i + 1 < size(); ++i) {
        if (std::abs(dt(i) - h) > rel_tol * span()) return false;
    }
    return true;
}

bool TimeGrid::power_of_two_steps() const {
    const int steps = size() - 1;
    return uniform() && steps > 0 && (steps & (steps - 1)) == 0;
}

std::optional<int> TimeGrid::index_of(double t, double rel_tol) const {
    const double tol = rel_tol * std::max(1.0, span());
    auto it = std::lower_bound(points_.begin(), points_.end(), t - tol);
    if (it == points_.end()) return std::nullopt;
    if (std::abs(*it - t) <= tol) return static_cast<int>(it - points_.begin());
    return std::nullopt;
}

bool TimeGrid::same_times(const TimeGrid& other, double rel_tol) const {
    if (size() != other.size()) return false;
    const double tol = rel_tol * std::max(1.0, span());
    for (int i = 0; i < size(); ++i) {
        if (std::abs((*this)[i] - other[i]) > tol) return false;
    }
    return true;
}

TimeGrid make_uniform_grid(int n, double t0, double t1) {
    if (n < 2) throw std::invalid_argument("make_uniform_grid: n must be >= 2");
    if (!(t0 < t1)) throw std::invalid_argument("make_uniform_grid: need t0 < t1");
    std::vector<double> pts(static_cast<size_t>(n));
    const double h = (t1 - t0) / (n - 1);
    for (int i = 0; i < n; ++i) pts[static_cast<size_t>(i)] = t0 + h * i;
    pts.back() = t1;
    return TimeGrid(std::move(pts));
}

SampledPath::SampledPath(TimeGrid g, RowMat v) : grid(std::move(g)), values(std::move(v)) {
    if (values.rows() != grid.size())
        throw std::invalid_argument("SampledPath: value count must equal grid point count");
}

Vec SampledPath::eval_linear(double t) const {
    const auto& pts = grid.points();
    if (t <= pts.front()) return at(0);
    if (t >= pts.back()) return at(size() - 1);
    auto it = std::upper_bound(pts.begin(), pts.end(), t);
    const int j = static_cast<int>(it - pts.begin());
    const double w = (t - pts[static_cast<size_t>(j - 1)]) /
                     (pts[static_cast<size_t>(j)] - pts[static_cast<size_t>(j - 1)]);
    return ((1.0 - w) * values.row(j - 1) + w * values.row(j)).transpose();
}

TwoParamField::TwoParamField(TimeGrid g, int rows, int cols)
    : grid(std::move(g)), rows_(rows), cols_(cols) {
    buf_.assign(static_cast<size_t>(pair_count() * entry_size()), 0.0);
}

namespace {

// (t_j - t_i)^(-2*expo) per gap, shared by the scalar and SIMD reductions so
// the two paths see identical weights.
std::vector<double> gap_weights_sq(const TimeGrid& g, double expo) {
    const int n = g.size();
    std::vector<double> w(static_cast<size_t>(n - 1));
    if (g.uniform()) {
        const double h = g.span() / (n - 1);
        for (int k = 1; k < n; ++k) {
            const double p = std::pow(h * k, -expo);
            w[static_cast<size_t>(k - 1)] = p * p;
        }
    } else {
        w.clear();
    }
    return w;
}

template <typename AllFn, typename DyadicFn, typename GenericPairFn>
double pair_reduce(const TimeGrid& grid, double expo, PairPolicy policy, AllFn all_fn,
                   DyadicFn dyadic_fn, GenericPairFn generic_fn) {
    const auto w = gap_weights_sq(grid, expo);
    if (!w.empty()) {
        return policy == PairPolicy::AllPairs ? all_fn(w.data()) : dyadic_fn(w.data());
    }
    // Non-uniform grid: direct per-pair weights. The dyadic policy keeps pairs
    // whose gap is a power-of-two multiple of the mesh.
    double best = 0.0;
    const int n = grid.size();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double gap = grid[j] - grid[i];
            if (policy == PairPolicy::DyadicPairs) {
                const double ratio = gap / grid.mesh();
                const double lg = std::log2(ratio);
                if (std::abs(lg - std::round(lg)) > 1e-9) continue;
            }
            const double v = generic_fn(i, j) * std::pow(gap, -expo);
            if (v > best) best = v;
        }
    }
    return best;
}

} // namespace

double holder_seminorm(const SampledPath& path, double alpha, PairPolicy policy) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("holder_seminorm: alpha must be in (0,1]");
    const int n = path.size();
    const int m = path.dim();
    if (n < 2) return 0.0;
    return pair_reduce(
        path.grid, alpha, policy,
        [&](const double* w) {
            return kernels::max_scaled_rownorm_diff(path.values.data(), n, m, w);
        },
        [&](const double* w) {
            return kernels::max_scaled_rownorm_diff_dyadic(path.values.data(), n, m, w);
        },
        [&](int i, int j) { return path.increment(i, j).norm(); });
}

double two_param_seminorm(const TwoParamField& field, double exponent, PairPolicy policy) {
    if (!(exponent > 0.0)) throw std::invalid_argument("two_param_seminorm: exponent must be > 0");
    const int n = field.n();
    if (n < 2) return 0.0;
    return pair_reduce(
        field.grid, exponent, policy,
        [&](const double* w) {
            return kernels::max_scaled_pairnorm(field.data(), n, field.entry_size(), w);
        },
        [&](const double* w) {
            return kernels::max_scaled_pairnorm_dyadic(field.data(), n, field.entry_size(), w);
        },
        [&](int i, int j) { return field.at(i, j).norm(); });
}

double sup_norm(const SampledPath& path) {
    double best = 0.0;
    for (int i = 0; i < path.size(); ++i) best = std::max(best, path.at(i).norm());
    return best;
}

SampledPath restrict_path(const SampledPath& path, double ta, double tb) {
    const auto ia = path.grid.index_of(ta);
    const auto ib = path.grid.index_of(tb);
    if (!ia || !ib || *ia >= *ib)
        throw std::invalid_argument("restrict_path: endpoints must be grid points with ta < tb");
    const int n = *ib - *ia + 1;
    std::vector<double> pts(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pts[static_cast<size_t>(i)] = path.grid[*ia + i] - ta;
    RowMat vals = path.values.middleRows(*ia, n);
    vals.rowwise() -= path.values.row(*ia);
    return SampledPath(TimeGrid(std::move(pts)), std::move(vals));
}

void write_csv(const SampledPath& path, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("write_csv: cannot open " + file);
    out << "t";
    for (int c = 0; c < path.dim(); ++c) out << ",v" << (c + 1);
    out << "\n";
    char buf[32];
    for (int i = 0; i < path.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", path.grid[i]);
        out << buf;
        for (int c = 0; c < path.dim(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", path.values(i, c));
            out << ',' << buf;
        }
        out << "\n";
    }
}

SampledPath read_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("read_csv: cannot open " + file);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file");
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.empty()) continue;
        times.push_back(row.front());
        rows.emplace_back(row.begin() + 1, row.end());
    }
    if (rows.empty()) throw std::runtime_error("read_csv: no data rows");
    const int d = static_cast<int>(rows.front().size());
    Mat vals(static_cast<int>(rows.size()), d);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != d) throw std::runtime_error("read_csv: ragged rows");
        for (int c = 0; c < d; ++c) vals(static_cast<int>(i), c) = rows[i][static_cast<size_t>(c)];
    }
    return SampledPath(TimeGrid(std::move(times)), std::move(vals));
}

} // namespace rcm
