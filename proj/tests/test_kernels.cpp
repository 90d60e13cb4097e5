#include "rcm/grid.hpp"
#include "rcm/kernels.hpp"
#include "rcm/philox.hpp"
#include "rcm/rough_path.hpp"

#include <doctest.h>

#include <cmath>

using namespace rcm;

namespace {

struct ScalarGuard {
    ScalarGuard() { kernels::set_force_scalar(true); }
    ~ScalarGuard() { kernels::set_force_scalar(false); }
};

RowMat random_rows(int n, int m, std::uint64_t seed) {
    Philox rng(seed);
    RowMat v(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) v(i, j) = rng.next_gaussian();
    return v;
}

} // namespace

TEST_CASE("scalar and simd rownorm reductions agree bitwise") {
    if (!kernels::have_avx2()) return;
    for (int m : {1, 2, 3, 4}) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            const int n = 173;
            const RowMat vals = random_rows(n, m, seed);
            std::vector<double> w(static_cast<size_t>(n - 1));
            for (int k = 1; k < n; ++k) {
                const double p = std::pow(k / double(n - 1), -0.45);
                w[static_cast<size_t>(k - 1)] = p * p;
            }
            const double simd = kernels::max_scaled_rownorm_diff(vals.data(), n, m, w.data());
            double ref;
            {
                ScalarGuard g;
                ref = kernels::max_scaled_rownorm_diff(vals.data(), n, m, w.data());
            }
            CHECK(simd == ref);
        }
    }
}

TEST_CASE("scalar and simd pairnorm reductions agree bitwise") {
    if (!kernels::have_avx2()) return;
    for (int e : {1, 2, 4}) {
        const int n = 97;
        const TimeGrid g = make_uniform_grid(n, 0.0, 1.0);
        Philox rng(7);
        TwoParamField f(g, e, 1);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                for (int k = 0; k < e; ++k) f.at(i, j)(k, 0) = rng.next_gaussian();
        std::vector<double> w(static_cast<size_t>(n - 1));
        for (int k = 1; k < n; ++k) w[static_cast<size_t>(k - 1)] = 1.0 / (k * k * 0.37 + 1.0);
        const double simd = kernels::max_scaled_pairnorm(f.data(), n, e, w.data());
        double ref;
        {
            ScalarGuard guard;
            ref = kernels::max_scaled_pairnorm(f.data(), n, e, w.data());
        }
        CHECK(simd == ref);
    }
}

TEST_CASE("scalar and simd remainder reductions agree bitwise") {
    if (!kernels::have_avx2()) return;
    for (auto [m, d] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {2, 2}}) {
        const int n = 151;
        const RowMat y = random_rows(n, m, 21);
        const RowMat dm = random_rows(n, m * d, 22);
        const RowMat w = random_rows(n, d, 23);
        std::vector<double> wgt(static_cast<size_t>(n - 1));
        for (int k = 1; k < n; ++k) wgt[static_cast<size_t>(k - 1)] = std::pow(1.7, -0.3 * k) + 0.2;
        const double simd =
            kernels::max_scaled_remainder(y.data(), dm.data(), w.data(), n, m, d, wgt.data());
        double ref;
        {
            ScalarGuard guard;
            ref = kernels::max_scaled_remainder(y.data(), dm.data(), w.data(), n, m, d, wgt.data());
        }
        CHECK(simd == ref);
    }
}

TEST_CASE("scalar and simd chen scans agree, including the argmax") {
    if (!kernels::have_avx2()) return;
    for (int d : {1, 2}) {
        const int n = 41;
        const TimeGrid g = make_uniform_grid(n, 0.0, 1.0);
        const RowMat w = random_rows(n, d, 31);
        const SampledPath path(g, w);
        RoughPath rp = lift_smooth(path, 0.45);
        // Corrupt one entry so the argmax is nontrivial.
        rp.second.at(n / 3, 2 * n / 3)(0, 0) += 0.5;
        const auto simd = kernels::chen_scan(rp.first.values.data(), rp.second.data(), n, d, false);
        kernels::ChenScanResult ref;
        {
            ScalarGuard guard;
            ref = kernels::chen_scan(rp.first.values.data(), rp.second.data(), n, d, false);
        }
        CHECK(simd.max_residual == ref.max_residual);
        CHECK(simd.s == ref.s);
        CHECK(simd.u == ref.u);
        CHECK(simd.t == ref.t);
    }
}

TEST_CASE("spanning scan detects what the full scan detects") {
    const int n = 33;
    const TimeGrid g = make_uniform_grid(n, 0.0, 1.0);
    const RowMat w = random_rows(n, 2, 17);
    RoughPath rp = lift_smooth(SampledPath(g, w), 0.45);
    rp.second.at(5, 20)(1, 0) += 1.0;
    const auto full = kernels::chen_scan(rp.first.values.data(), rp.second.data(), n, 2, false);
    const auto span = kernels::chen_scan(rp.first.values.data(), rp.second.data(), n, 2, true);
    CHECK(full.max_residual >= 1.0 - 1e-9);
    CHECK(span.max_residual >= 1.0 - 1e-9);
    // Telescoping bound: full max <= (2n+1) x spanning max.
    CHECK(full.max_residual <= (2.0 * n + 1.0) * span.max_residual * (1.0 + 1e-12));
}
