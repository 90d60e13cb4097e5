#pragma once

#include "rcm/linear_flow.hpp"

namespace rcm {

class ConvergenceFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TruncationPolicy {
    enum class Kind { None, Fixed, Tempered } kind = Kind::None;
    double R = 1.0;        // fixed radius
    double K = 0.0;        // contraction budget for the tempered radius
    double CF = 1.0, CG = 1.0; // logged constants entering R(W)
};

struct SolveOptions {
    int max_iterations = 60;
    double tolerance = 1e-11;      // fixed-point tolerance in the D^{2a} norm
    int min_cells = 4;             // subdivision floor, in mesh cells
    double contraction_threshold = 0.9;
    QuadRule quadrature = QuadRule::Left;
    PairPolicy norm_policy = PairPolicy::DyadicPairs;
};

struct RdeSolution {
    ControlledPath u; // (U, U' = G(U))
    std::vector<double> residuals;
    int iterations = 0;
    bool converged = false;
    double contraction_factor = 0.0;       // worst measured ratio
    std::vector<double> subinterval_norms; // D norm per solved subinterval
    std::vector<std::pair<double, double>> subintervals;
    double truncation_scale = 1.0; // last cut-off factor (1 when inactive)
};

// Picard iteration for U = S(.) xi + int S F(U) dr + int S G(U) dW on
// subintervals short enough that the measured contraction factor stays below
// the threshold, concatenated left to right.
RdeSolution solve_rde(const LinearPart& A, const SmoothCoefficient& F, const SmoothCoefficient& G,
                      const Vec& xi, const RoughPath& rp, const SolveOptions& opts);

// Same iteration with F_R = F o chi_R and G_R = G o chi_R (path-level cut-off).
RdeSolution solve_rde_truncated(const LinearPart& A, const SmoothCoefficient& F,
                                const SmoothCoefficient& G, const Vec& xi, const RoughPath& rp,
                                double R, const CutoffFunction& f, const SolveOptions& opts);

struct CocycleReport {
    double gap = 0.0;
    bool pass = true;
    Vec one_shot;  // phi(t + tau, W, xi)
    Vec two_shot;  // phi(t, Theta_tau W, phi(tau, W, xi))
};

// phi(t+tau, W, xi) versus phi(t, Theta_tau W, phi(tau, W, xi)).
CocycleReport cocycle_check(const LinearPart& A, const SmoothCoefficient& F,
                            const SmoothCoefficient& G, const Vec& xi, const RoughPath& rp,
                            double t, double tau, double tol, const SolveOptions& opts);

// Right-hand side of the mild equation evaluated on a candidate solution;
// the max node gap |RHS - U| is the mild-equation residual.
double mild_residual(const LinearPart& A, const SmoothCoefficient& F, const SmoothCoefficient& G,
                     const Vec& xi, const RoughPath& rp, const ControlledPath& u, QuadRule rule);

} // namespace rcm
