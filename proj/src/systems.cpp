#include "rcm/systems.hpp"

#include <cmath>

namespace rcm {

SmoothCoefficient det_oracle_drift() {
    // Bound constants on the unit ball: DF = [[y, x], [2x, 0]].
    return SmoothCoefficient(
        "det-oracle-drift", 2, 2, 1,
        [](const Vec& u) {
            Vec v(2);
            v << u(0) * u(1), u(0) * u(0);
            return v;
        },
        [](const Vec& u) {
            Mat j(2, 2);
            j << u(1), u(0), 2.0 * u(0), 0.0;
            return j;
        },
        /*c1b=*/2.5, /*c2b=*/3.0, /*c3b=*/0.0, true, true, false);
}

SmoothCoefficient cubic_saturated_diffusion(int state_dim, int noise_dim, double eps) {
    // g(v) = v^3 / (1+v^2)^2 applied componentwise into the first noise column.
    auto g = [](double v) {
        const double q = 1.0 + v * v;
        return v * v * v / (q * q);
    };
    auto dg = [](double v) {
        const double q = 1.0 + v * v;
        return (3.0 * v * v * q - 4.0 * v * v * v * v) / (q * q * q);
    };
    const int rows = state_dim, cols = noise_dim;
    return SmoothCoefficient(
        "cubic-saturated", state_dim, rows, cols,
        [rows, cols, eps, g](const Vec& u) {
            Vec v = Vec::Zero(rows * cols);
            for (int a = 0; a < rows; ++a) v(a * cols) = eps * g(u(a));
            return v;
        },
        [rows, cols, state_dim, eps, dg](const Vec& u) {
            Mat j = Mat::Zero(rows * cols, state_dim);
            for (int a = 0; a < rows; ++a) j(a * cols, a) = eps * dg(u(a));
            return j;
        },
        /*c1b=*/1.2 * eps, /*c2b=*/3.1 * eps, /*c3b=*/6.1 * eps, true, true, true);
}

TestSystem make_system(const std::string& name) {
    TestSystem sys;
    sys.name = name;
    Mat A(2, 2);
    A << 0.0, 0.0, 0.0, -1.0;
    if (name == "linear") {
        sys.A = LinearPart(A);
        sys.F = SmoothCoefficient::zero(2, 2, 1);
        sys.G = SmoothCoefficient::zero(2, 2, 1);
    } else if (name == "det-oracle") {
        sys.A = LinearPart(A);
        sys.F = det_oracle_drift();
        sys.G = SmoothCoefficient::zero(2, 2, 1);
    } else if (name == "rough-oracle") {
        sys.A = LinearPart(A);
        sys.F = det_oracle_drift();
        sys.G = cubic_saturated_diffusion(2, 1, 0.1);
    } else {
        throw std::invalid_argument("make_system: unknown system '" + name + "'");
    }
    return sys;
}

std::vector<std::string> system_names() { return {"linear", "det-oracle", "rough-oracle"}; }

} // namespace rcm
