#pragma once

#include "rcm/grid.hpp"

#include <memory>

namespace rcm {

enum class TriplePolicy {
    AllTriples, // full O(n^3) scan
    Spanning    // triples (s,u,u+1): O(n^2); full max <= (2n+1) x spanning max
};

struct ChenReport {
    double max_residual = 0.0;
    int s = 0, u = 0, t = 0;
    bool pass = true;
};

// First-order path W plus the two-parameter field WW on the same grid, linked
// by Chen's relation: WW(s,t) - WW(s,u) - WW(u,t) = W(s,u) (x) W(u,t).
struct RoughPath {
    SampledPath first;   // n x d
    TwoParamField second; // d x d per pair
    double alpha = 0.4;
    double chen_tol = 1e-10; // relative to max(1, scale^2)

    int dim() const { return first.dim(); }
    int size() const { return first.size(); }
    const TimeGrid& grid() const { return first.grid; }

    double holder_first(PairPolicy policy = PairPolicy::DyadicPairs) const;
    double holder_second(PairPolicy policy = PairPolicy::DyadicPairs) const;
};

// WW as the exact iterated integral of the piecewise-linear interpolant of
// `path`; Chen holds to rounding by construction.
RoughPath lift_smooth(const SampledPath& path, double alpha);

// Lift of the level-`level` piecewise-linear dyadic interpolant, evaluated on
// the full grid. The returned first level is the interpolant itself, so Chen
// is exact. Requires a power-of-two uniform grid and level <= log2(steps).
RoughPath levy_area_dyadic(const SampledPath& path, int level, double alpha);

ChenReport check_chen(const RoughPath& rp, double tol,
                      TriplePolicy policy = TriplePolicy::AllTriples);

// Theta_tau: W_t -> W_{t+tau} - W_tau, WW unchanged per pair; tau must be a
// grid point offset from the left endpoint lattice.
RoughPath shift(const RoughPath& rp, double tau);

// Restriction to the grid points inside [ta, tb] (both on the grid).
RoughPath restrict_window(const RoughPath& rp, double ta, double tb);

// alpha-Holder distance of first levels plus 2*alpha distance of second levels.
double rough_distance(const RoughPath& a, const RoughPath& b,
                      PairPolicy policy = PairPolicy::AllPairs);

struct FbmSpec {
    double hurst = 0.5;
    int dimension = 1;
    std::uint64_t seed = 0;
    TimeGrid grid; // power-of-two uniform
};

// Exact-in-law fBm sampling by Cholesky factorization of
// E[B_t B_s] = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2 (two-sided), with the
// factor cached per (grid,H) so ensembles reuse it. Deterministic per seed
// (Philox4x32-10 stream; components drawn one after another).
class FbmSampler {
public:
    FbmSampler(TimeGrid grid, double hurst);
    SampledPath sample(std::uint64_t seed, int dimension) const;
    const TimeGrid& grid() const { return grid_; }

private:
    TimeGrid grid_;
    double hurst_;
    int zero_index_; // -1 if 0 is not a grid point
    Mat chol_;       // lower factor over the non-zero grid points
};

SampledPath sample_fbm(const FbmSpec& spec);

struct TemperednessReport {
    double slope = 0.0;
    double intercept = 0.0;
    bool pass = true;
};

// Least-squares slope of ln+ R(Theta_i W) against |i|; pass iff slope <= threshold.
TemperednessReport temperedness_diagnostic(const std::vector<int>& fibers,
                                           const std::vector<double>& samples,
                                           double threshold = 0.05);

} // namespace rcm
