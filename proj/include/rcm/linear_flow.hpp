#pragma once

#include "rcm/controlled.hpp"

namespace rcm {

struct LinearPart {
    Mat A;
    double opnorm = 0.0; // induced Euclidean norm

    LinearPart() = default;
    explicit LinearPart(Mat a);
    int dim() const { return static_cast<int>(A.rows()); }
};

Mat matrix_exponential(const LinearPart& A, double t);
Mat matrix_exponential(const Mat& A, double t);

class SpectrumViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SplitMode { Dichotomy, Trichotomy };

// One spectral block: oblique projector P = V W^T with W^T V = I and
// restricted generator Ar in the V basis, so e^{tA} P = V e^{t Ar} W^T.
// Keeping the restricted form is what makes backward center propagation
// stable when A also has strongly stable directions.
struct SpectralBlock {
    Mat V;  // n x k orthonormal basis of the invariant subspace
    Mat W;  // n x k dual basis
    Mat Ar; // k x k restricted generator
    Mat P;  // n x n projector
    int k() const { return static_cast<int>(V.cols()); }
    bool empty() const { return V.cols() == 0; }
    Vec coords(const Vec& x) const { return W.transpose() * x; }
    Vec apply_semigroup(double t, const Vec& x) const;
};

struct Splitting {
    SpectralBlock center, stable, unstable;
    double gamma = 0.0, beta = 0.0;
    double Mc = 1.0, Ms = 1.0, Mu = 1.0;
    double rho1 = 0.0, rho2 = 0.0, rho3 = 0.0; // trichotomy exponents
    double center_tol = 1e-8;
    bool trichotomy = false;
    double fit_horizon = 0.0; // sampling window used for Mc/Ms/Mu
    int fit_samples = 0;
    int dim() const { return static_cast<int>(center.P.rows()); }
};

// Invariant-subspace projections via a sorted real Schur form; eigenvalues
// with |Re| <= center_tol are center, Re < -center_tol stable, Re > center_tol
// unstable (trichotomy only). beta gets a (1 - margin) safety factor off the
// stable spectral abscissa so the pure exponential bound survives non-normal
// transients.
Splitting spectral_split(const LinearPart& A, double center_tol = 1e-8,
                         SplitMode mode = SplitMode::Dichotomy, double margin = 0.1);

// Fits Mc = sup_{t in [-horizon,0]} |e^{t Ac}| e^{-gamma t} and
// Ms = sup_{t in [0,horizon]} |e^{t As}| e^{beta t} on a sampled grid.
Splitting dichotomy_constants(Splitting split, const LinearPart& A, double horizon = 20.0,
                              int samples = 2000);

// C_S: max over basis vectors of the sampled 2*alpha-Holder norm of t -> S(t)x
// on [0,1] (sup norm plus Holder quotient).
double group_holder_constant(const Mat& A, double alpha, int grid_points = 257);

enum class QuadRule { Left, Trapezoid };

// Cached per-step operators for the exponential integrator:
// E = e^{hA}, Phi1 = phi1(hA), Phi1h = h phi1(hA), Phi2h = h phi2(hA).
struct ExpStepper {
    Mat E, Phi1, Phi1h, Phi2h;
};
ExpStepper make_exp_stepper(const Mat& A, double h);

// t -> S(t) xi + int_0^t S(t-r) F(Y_r) dr with zero Gubinelli derivative.
// Left-point rule with exact exponential propagation by default.
ControlledPath semigroup_convolve_drift(const LinearPart& A, const SmoothCoefficient& F,
                                        const ControlledPath& cp, const Vec& xi,
                                        QuadRule rule = QuadRule::Left);

// t -> int_0^t S(t-r) Y_r dW_r for a map-valued integrand (Y flattened row-major
// to m*d, Y' of shape (m*d) x d); the result's Gubinelli derivative is Y itself.
ControlledPath semigroup_convolve_rough(const LinearPart& A, const ControlledPath& integrand,
                                        const RoughPath& rp);

// One-step compensated increment Y_u W(u,u+1) + Y'_u WW(u,u+1) of a map-valued
// integrand, in the target space R^m.
Vec rough_one_step(const ControlledPath& integrand, const RoughPath& rp, int u, int m);

} // namespace rcm
