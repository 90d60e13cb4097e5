#pragma once

#include "rcm/rough_path.hpp"

#include <functional>

namespace rcm {

// Pair (Y, Y') controlled by a reference rough path: Y values in R^m, the
// Gubinelli derivative Y' an m x d linear map per node. The remainder
// R^Y(s,t) = Y(s,t) - Y'_s W(s,t) is always derived, never stored.
struct ControlledPath {
    SampledPath y;             // n x m
    std::vector<Mat> yprime;   // n entries, each m x d
    double alpha = 0.4;

    int size() const { return y.size(); }
    int state_dim() const { return y.dim(); }
    int noise_dim() const { return yprime.empty() ? 0 : static_cast<int>(yprime.front().cols()); }

    static ControlledPath zero(const TimeGrid& grid, int m, int d, double alpha);
    static ControlledPath constant(const TimeGrid& grid, const Vec& y0, const Mat& yp0, double alpha);
};

ControlledPath operator-(const ControlledPath& a, const ControlledPath& b);
ControlledPath operator+(const ControlledPath& a, const ControlledPath& b);
ControlledPath scale(const ControlledPath& a, double c);

struct ControlledNorms {
    double gubinelli_holder = 0.0; // ||Y'||_alpha
    double remainder = 0.0;        // ||R^Y||_{2 alpha}
    double seminorm = 0.0;         // sum of the two
    double norm = 0.0;             // |Y_0| + |Y'_0| + seminorm
};

ControlledNorms controlled_norms(const ControlledPath& cp, const RoughPath& rp,
                                 PairPolicy policy = PairPolicy::DyadicPairs);

// ||R^Y||_{2 alpha} alone (same estimator the norms use).
double remainder_seminorm(const ControlledPath& cp, const RoughPath& rp,
                          PairPolicy policy = PairPolicy::DyadicPairs);

// Smooth map R^in -> R^(rows x cols) handled in flattened (row-major) form,
// with the bound constants and vanishing-at-origin flags the estimates need.
class SmoothCoefficient {
public:
    using ValueFn = std::function<Vec(const Vec&)>;
    using JacobianFn = std::function<Mat(const Vec&)>;

    SmoothCoefficient() = default;
    SmoothCoefficient(std::string name, int in_dim, int out_rows, int out_cols, ValueFn value,
                      JacobianFn jacobian, double c1b, double c2b, double c3b,
                      bool zero_value, bool zero_jacobian, bool zero_hessian);

    const std::string& name() const { return name_; }
    int in_dim() const { return in_; }
    int out_rows() const { return rows_; }
    int out_cols() const { return cols_; }
    int out_dim() const { return rows_ * cols_; }

    Vec value(const Vec& x) const { return value_(x); }
    Mat value_mat(const Vec& x) const;      // rows x cols
    Mat jacobian(const Vec& x) const { return jacobian_(x); } // out_dim x in_dim
    Mat dir_deriv(const Vec& x, const Vec& v) const;          // rows x cols

    double c1b() const { return c1b_; }
    double c2b() const { return c2b_; }
    double c3b() const { return c3b_; }
    bool zero_value() const { return zero_value_; }
    bool zero_jacobian() const { return zero_jacobian_; }
    bool zero_hessian() const { return zero_hessian_; }

    static SmoothCoefficient zero(int in_dim, int rows, int cols);
    static SmoothCoefficient linear(const Mat& B); // x -> B x

private:
    std::string name_;
    int in_ = 0, rows_ = 0, cols_ = 0;
    ValueFn value_;
    JacobianFn jacobian_;
    double c1b_ = 0, c2b_ = 0, c3b_ = 0;
    bool zero_value_ = false, zero_jacobian_ = false, zero_hessian_ = false;
};

// Scalar cut-off profile: 1 on [0,1/2], 0 on [1,inf), C^3 in between.
// Default is the exponential profile f(x) = g(1-x) / (g(x-1/2) + g(1-x)),
// g(x) = exp(-1/x) for x > 0.
class CutoffFunction {
public:
    CutoffFunction(); // exponential profile, smoothness checked on the band
    double operator()(double x) const;
    double third_derivative_bound() const { return d3_bound_; }

private:
    double d3_bound_ = 0.0;
};

struct GubinelliResult {
    Mat value;             // m x d: the matrix of integrals of Y^a against W^b
    double error_estimate; // local sewing bound C (||W|| ||R^Y|| + ||WW|| ||Y'||) (t-s)^{3a}
};

// Compensated Riemann sum Sum_u (Y_u (x) W(u,v) + Y'_u WW(u,v)) over an
// explicit partition given as grid indices (finest partition by default).
GubinelliResult gubinelli_integral(const ControlledPath& cp, const RoughPath& rp, int i0, int i1,
                                   const std::vector<int>* partition = nullptr);
GubinelliResult gubinelli_integral(const ControlledPath& cp, const RoughPath& rp, double s, double t);

// (G(Y), DG(Y) Y').
ControlledPath compose_smooth(const SmoothCoefficient& G, const ControlledPath& cp,
                              const RoughPath& rp);

// chi_R: (Y, Y') -> (cY, cY') with c = f(||Y,Y'||_D / R).
ControlledPath cutoff(const ControlledPath& cp, const RoughPath& rp, double R,
                      const CutoffFunction& f, PairPolicy policy = PairPolicy::DyadicPairs);
double cutoff_factor(const ControlledPath& cp, const RoughPath& rp, double R,
                     const CutoffFunction& f, PairPolicy policy = PairPolicy::DyadicPairs);

struct GapBound {
    double bound = 0.0;
    double actual = 0.0;
    bool holds = true;
};

// |H(x) - H(y)| <= C_H max(|x|,|y|) |x - y| for H with H(0) = 0, DH(0) = 0;
// C_H is the stored bound on the Lipschitz constant of DH.
GapBound lipschitz_gap_bound(const SmoothCoefficient& H, const Vec& x, const Vec& y);

// Sewing constant used for the per-call Gubinelli error estimate.
double sewing_constant(double alpha);

} // namespace rcm
