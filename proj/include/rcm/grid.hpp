#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Row-major so per-node rows are contiguous for the pairwise kernels.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Strictly increasing time points; mesh is the largest adjacent gap.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> points);

    int size() const { return static_cast<int>(points_.size()); }
    double operator[](int i) const { return points_[static_cast<size_t>(i)]; }
    double mesh() const { return mesh_; }
    double t0() const { return points_.front(); }
    double t1() const { return points_.back(); }
    double span() const { return t1() - t0(); }
    double dt(int i) const { return points_[static_cast<size_t>(i) + 1] - points_[static_cast<size_t>(i)]; }
    const std::vector<double>& points() const { return points_; }

    bool uniform(double rel_tol = 1e-12) const;
    // Number of steps is a power of two (uniform grids only).
    bool power_of_two_steps() const;

    // Index of a grid point equal to t (within a span-relative tolerance).
    std::optional<int> index_of(double t, double rel_tol = 1e-9) const;

    bool same_times(const TimeGrid& other, double rel_tol = 1e-12) const;

private:
    std::vector<double> points_;
    double mesh_ = 0.0;
};

TimeGrid make_uniform_grid(int n, double t0, double t1);

// One value vector per grid point, row i of `values`.
struct SampledPath {
    TimeGrid grid;
    RowMat values; // size() x dim

    SampledPath() = default;
    SampledPath(TimeGrid g, RowMat v);

    int dim() const { return static_cast<int>(values.cols()); }
    int size() const { return grid.size(); }
    Vec at(int i) const { return values.row(i).transpose(); }
    Vec increment(int i, int j) const { return (values.row(j) - values.row(i)).transpose(); }

    // Piecewise-linear evaluation between grid points.
    Vec eval_linear(double t) const;
};

// One r x c tensor per ordered grid pair (i,j), i <= j, stored contiguously
// in upper-triangular order. Diagonal entries are kept (and are zero for the
// fields this library builds).
class TwoParamField {
public:
    TwoParamField() = default;
    TwoParamField(TimeGrid g, int rows, int cols);

    int n() const { return grid.size(); }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int entry_size() const { return rows_ * cols_; }
    std::int64_t pair_count() const {
        const std::int64_t nn = n();
        return nn * (nn + 1) / 2;
    }

    std::int64_t pair_index(int i, int j) const {
        const std::int64_t nn = n();
        return static_cast<std::int64_t>(i) * nn - static_cast<std::int64_t>(i) * (i - 1) / 2 + (j - i);
    }

    // Entries are stored row-major so the raw buffer matches the kernels'
    // a*cols + b indexing.
    Eigen::Map<const RowMat> at(int i, int j) const {
        return Eigen::Map<const RowMat>(buf_.data() + pair_index(i, j) * entry_size(), rows_,
                                        cols_);
    }
    Eigen::Map<RowMat> at(int i, int j) {
        return Eigen::Map<RowMat>(buf_.data() + pair_index(i, j) * entry_size(), rows_, cols_);
    }

    const double* data() const { return buf_.data(); }
    double* data() { return buf_.data(); }

    TimeGrid grid;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> buf_;
};

enum class PairPolicy {
    AllPairs,   // O(n^2) reference estimator
    DyadicPairs // gaps that are power-of-two multiples of the mesh, O(n log n)
};

// max over selected grid pairs of |Y_t - Y_s| / (t-s)^alpha.
double holder_seminorm(const SampledPath& path, double alpha,
                       PairPolicy policy = PairPolicy::DyadicPairs);

// max over grid pairs s < t of |field(s,t)|_F / (t-s)^exponent.
double two_param_seminorm(const TwoParamField& field, double exponent,
                          PairPolicy policy = PairPolicy::DyadicPairs);

double sup_norm(const SampledPath& path);

// Slice [ta, tb] (grid points) and rebase: times shift to start at 0 and the
// values at ta are subtracted.
SampledPath restrict_path(const SampledPath& path, double ta, double tb);

// CSV format: header `t,v1,...,vd`, one row per grid point, 17 significant digits.
void write_csv(const SampledPath& path, const std::string& file);
SampledPath read_csv(const std::string& file);

} // namespace rcm
