#pragma once

#include "rcm/linear_flow.hpp"

namespace rcm {

struct TestSystem {
    std::string name;
    int state_dim = 2;
    int noise_dim = 1;
    LinearPart A;
    SmoothCoefficient F;
    SmoothCoefficient G;
};

// Named systems used by the CLI and the acceptance suite:
//   linear       A = diag(0,-1), F = 0, G = 0
//   det-oracle   x' = xy, y' = -y + x^2 (A = diag(0,-1)), G = 0
//   rough-oracle det-oracle drift plus the cubic-saturated 2x1 diffusion
//                G_i(u) = eps u_i^3 / (1 + u_i^2)^2, eps = 0.1
TestSystem make_system(const std::string& name);
std::vector<std::string> system_names();

// Drift of the det-oracle: F(x,y) = (xy, x^2), F(0) = DF(0) = 0.
SmoothCoefficient det_oracle_drift();
// Diffusion with G(0) = DG(0) = D2G(0) = 0, bounded with all derivatives.
SmoothCoefficient cubic_saturated_diffusion(int state_dim, int noise_dim, double eps);

} // namespace rcm
