#pragma once

#include "rcm/rde.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace rcm {

class GapViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class InvalidSplit : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GapConstants {
    double Mc = 1.0, gamma = 0.0, Ms = 1.0, beta = 1.0;
    double C_S = 1.0;
    double eta = -0.5; // weight exponent, -beta < eta < 0
    double K = 0.0;    // contraction budget
    double gap_lhs = 0.0;
    bool valid = false;
};

// Left side of the dichotomy gap inequality at budget K.
double dichotomy_gap_lhs(double K, double eta, double gamma, double beta, double Mc, double Ms,
                         double C_S);

// Left side of the trichotomy gap inequality as printed in its own sign
// convention (eta > 0); the unstable term can be dropped for an empty block.
double trichotomy_gap_lhs(double K, double eta, double rho1, double rho2, double rho3, double Mc,
                          double Mu, double Ms, double C_S, bool include_unstable);

// eta defaults to (gamma - beta)/2 and K to the closed form
// 1/K = 4 e^{(b+g)/2} (e^{(b-g)/2} C_S (Ms + Mc) + 1) / (1 - e^{-(b+g)/2}).
// The evaluated gap left side is recorded; with this K it lands in (1/4, 1/2),
// so `valid` (< 1/4) requires a smaller explicit K.
GapConstants gap_constant(const Splitting& split, double C_S,
                          std::optional<double> eta = std::nullopt,
                          std::optional<double> K = std::nullopt);
GapConstants gap_constant(double Mc, double gamma, double Ms, double beta, double C_S,
                          std::optional<double> eta = std::nullopt,
                          std::optional<double> K = std::nullopt);

struct TrichotomyGapConstants {
    double rho1 = 0.0, rho2 = 0.0, rho3 = 0.0;
    double Mc = 1.0, Mu = 1.0, Ms = 1.0;
    double C_S = 1.0;
    double eta = 0.0; // trichotomy convention: rho2 < eta < min(rho1, rho3)
    double K = 0.0;
    double gap_lhs = 0.0;
    bool valid = false;
    bool has_unstable = true;
};

// K is sized so the three-term left side evaluates just below 1/4.
TrichotomyGapConstants trichotomy_gap_constant(const Splitting& split, double C_S,
                                               std::optional<double> eta = std::nullopt);

// R(W) = min(K / (CF + CG (1 + ||W||_a)(||W||_a + ||WW||_2a)), 1).
double tempered_radius(double K, double CF, double CG, double w_norm, double ww_norm);

// Window of controlled paths U^{i-1}, i = 0, -1, ..., -N+1, each on [0,1];
// array index f holds fiber label i - 1 = -1 - f.
struct FiberSequence {
    std::vector<ControlledPath> fibers;
    double eta = -0.5;

    int window() const { return static_cast<int>(fibers.size()); }
    static int fiber_label(int f) { return -1 - f; } // the paper's i - 1
    static FiberSequence zero(int window, const TimeGrid& grid, int m, int d, double alpha,
                              double eta);
};

FiberSequence operator-(const FiberSequence& a, const FiberSequence& b);

struct LpConfig {
    int window = 24;
    int tail_depth = 24;
    double tol = 1e-12;
    int max_iterations = 80;
    GapConstants gap;
    TruncationPolicy truncation; // Fixed R or Tempered (K, CF, CG)
    QuadRule quadrature = QuadRule::Trapezoid;
    PairPolicy norm_policy = PairPolicy::DyadicPairs;
    int levy_level = -1; // -1: lift the raw fiber path itself
};

// Everything a fixed-point computation needs, anchored at integer `origin`:
// fiber f carries the noise window [origin - f - 1, origin - f] shifted to [0,1].
class LpProblem {
public:
    LpProblem(SampledPath two_sided_path, double alpha, Splitting split, SmoothCoefficient F,
              SmoothCoefficient G, LpConfig config, int origin = 0);

    const LpConfig& config() const { return cfg_; }
    const Splitting& split() const { return split_; }
    const SmoothCoefficient& drift() const { return F_; }
    const SmoothCoefficient& diffusion() const { return G_; }
    const RoughPath& fiber_rough(int f) const { return fiber_rp_[static_cast<size_t>(f)]; }
    double fiber_radius(int f) const { return fiber_R_[static_cast<size_t>(f)]; }
    const TimeGrid& fiber_grid() const { return fiber_rp_.front().grid(); }
    const SampledPath& noise() const { return path_; }
    double alpha() const { return alpha_; }
    int origin() const { return origin_; }
    const CutoffFunction& cutoff_profile() const { return cutoff_; }

    // Same problem re-anchored at a shifted origin (fibers move with it).
    LpProblem shifted(int new_origin) const;

    // Noise window [origin + j, origin + j + 1] shifted to [0,1], lifted.
    RoughPath forward_fiber(int j) const;
    double forward_radius(int j) const;

    double weighted_norm(const FiberSequence& seq) const;
    FiberSequence apply(const FiberSequence& seq, const Vec& xi_c) const;

private:
    RoughPath make_fiber(double left_time) const;
    double forward_radius_for(const RoughPath& rp) const;

    SampledPath path_;
    double alpha_;
    Splitting split_;
    SmoothCoefficient F_, G_;
    LpConfig cfg_;
    int origin_;
    CutoffFunction cutoff_;
    std::vector<RoughPath> fiber_rp_;
    std::vector<double> fiber_R_;
    // center/stable propagators on the shared fiber grid
    std::vector<Mat> Ec_t_, Es_t_;
    Mat Ec_minus_;              // e^{-Ac}
    std::vector<Mat> Ec_pow_;   // e^{-p Ac}, p = 0..window+1
    std::vector<Mat> Es_pow_;   // e^{+p As}, p = 0..window+tail
    ExpStepper step_c_, step_s_;
};

struct ManifoldChart {
    std::shared_ptr<const LpProblem> problem;
    FiberSequence gamma_seq;
    Vec xi_c;                 // center-space anchor of the chart
    Vec hc;                   // h^c(xi_c) = P^s Gamma[-1,1]
    double rho = 0.0;         // tempered ball radius rho(W)
    double L_gamma = 0.0;     // measured Lipschitz estimate of xi -> Gamma
    double contraction_factor = 0.0;
    double tail_bound = 0.0;
    int iterations = 0;
    double endpoint_mismatch = 0.0;
    double center_recovery_error = 0.0;
    bool outside_ball = false;

    // Lazy graph-query cache; boxed so charts stay copyable and shared charts
    // can be queried concurrently.
    struct GraphCache {
        std::mutex mu;
        std::map<std::vector<double>, Vec> entries;
    };
    std::shared_ptr<GraphCache> graph_cache = std::make_shared<GraphCache>();
};

// Discrete Lyapunov-Perron transform J_{R,d} applied once.
FiberSequence lp_map_apply(const LpProblem& problem, const FiberSequence& seq, const Vec& xi_c);

ManifoldChart lp_fixed_point(std::shared_ptr<const LpProblem> problem, const Vec& xi_c,
                             bool estimate_lipschitz = true);

// h^c(xi_c); re-solves the fixed point lazily per query and caches by xi_c.
// Queries outside the chart's guaranteed ball are answered but flagged.
Vec manifold_graph(const ManifoldChart& chart, const Vec& xi_c,
                   bool* extrapolated = nullptr);

struct InvarianceStep {
    double gap = 0.0;
    bool ball_exit = false;
    Vec state;
};

struct InvarianceReport {
    std::vector<InvarianceStep> steps;
    double max_gap = 0.0;
    bool pass = true;
};

// Flow one unit with the truncated solver per step, recompute the chart on the
// shifted fiber and measure the stable-part gap |P^s phi - h^c(P^c phi)|.
InvarianceReport verify_invariance(const ManifoldChart& chart, int steps, double tol,
                                   const SolveOptions& solver_opts);

struct TangencyReport {
    std::vector<double> first_difference;  // |Dh^c(0) e_j| estimates per center direction
    std::vector<double> second_difference; // |D2h^c(0)(e_j,e_j)| estimates
    std::vector<double> one_sided_ratio;   // D+(h)/D+(h/2) per direction
    double probe = 0.0;
    bool pass = true;
};

TangencyReport tangency_check(const ManifoldChart& chart, double probe, double slope_constant = 0.1);

} // namespace rcm
