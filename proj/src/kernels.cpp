#include "kernels_internal.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <vector>

namespace rcm::kernels {

namespace {
std::atomic<bool> g_force_scalar{false};

bool detect_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

bool use_simd() {
    static const bool has = detect_avx2();
    return has && !g_force_scalar.load(std::memory_order_relaxed);
}
} // namespace

bool have_avx2() {
    static const bool has = detect_avx2();
    return has;
}

void set_force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }
bool force_scalar() { return g_force_scalar.load(std::memory_order_relaxed); }

double max_scaled_rownorm_diff(const double* vals, int n, int m, const double* w) {
    return use_simd() ? avx2::max_scaled_rownorm_diff(vals, n, m, w)
                      : scalar::max_scaled_rownorm_diff(vals, n, m, w);
}

double max_scaled_remainder(const double* y, const double* dmat, const double* w,
                            int n, int m, int d, const double* wgt) {
    return use_simd() ? avx2::max_scaled_remainder(y, dmat, w, n, m, d, wgt)
                      : scalar::max_scaled_remainder(y, dmat, w, n, m, d, wgt);
}

double max_scaled_pairnorm(const double* pairbuf, int n, int entry_size, const double* wgt) {
    return use_simd() ? avx2::max_scaled_pairnorm(pairbuf, n, entry_size, wgt)
                      : scalar::max_scaled_pairnorm(pairbuf, n, entry_size, wgt);
}

// Dyadic-gap variants are O(n log n); a scalar loop is already cheap.
double max_scaled_rownorm_diff_dyadic(const double* vals, int n, int m, const double* w) {
    double best = 0.0;
    for (int g = 1; g < n; g *= 2) {
        const double wg = w[g - 1];
        for (int i = 0; i + g < n; ++i) {
            const double* ri = vals + static_cast<std::int64_t>(i) * m;
            const double* rj = vals + static_cast<std::int64_t>(i + g) * m;
            double s = 0.0;
            for (int k = 0; k < m; ++k) {
                const double dd = rj[k] - ri[k];
                s += dd * dd;
            }
            if (s * wg > best) best = s * wg;
        }
    }
    return std::sqrt(best);
}

double max_scaled_remainder_dyadic(const double* y, const double* dmat, const double* w,
                                   int n, int m, int d, const double* wgt) {
    double best = 0.0;
    for (int g = 1; g < n; g *= 2) {
        const double wg = wgt[g - 1];
        for (int i = 0; i + g < n; ++i) {
            const int j = i + g;
            const double* yi = y + static_cast<std::int64_t>(i) * m;
            const double* yj = y + static_cast<std::int64_t>(j) * m;
            const double* Di = dmat + static_cast<std::int64_t>(i) * m * d;
            const double* wi = w + static_cast<std::int64_t>(i) * d;
            const double* wj = w + static_cast<std::int64_t>(j) * d;
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                double acc = yj[a] - yi[a];
                for (int b = 0; b < d; ++b) acc -= Di[a * d + b] * (wj[b] - wi[b]);
                s += acc * acc;
            }
            if (s * wg > best) best = s * wg;
        }
    }
    return std::sqrt(best);
}

double max_scaled_pairnorm_dyadic(const double* pairbuf, int n, int entry_size, const double* wgt) {
    double best = 0.0;
    const auto pair_off = [n, entry_size](int i, int j) {
        return (static_cast<std::int64_t>(i) * n - static_cast<std::int64_t>(i) * (i - 1) / 2 +
                (j - i)) * entry_size;
    };
    for (int g = 1; g < n; g *= 2) {
        const double wg = wgt[g - 1];
        for (int i = 0; i + g < n; ++i) {
            const double* p = pairbuf + pair_off(i, i + g);
            double s = 0.0;
            for (int k = 0; k < entry_size; ++k) s += p[k] * p[k];
            if (s * wg > best) best = s * wg;
        }
    }
    return std::sqrt(best);
}

ChenScanResult chen_scan(const double* w, const double* ww, int n, int d, bool spanning) {
    if (!spanning) {
        return use_simd() ? avx2::chen_scan_full(w, ww, n, d) : scalar::chen_scan_full(w, ww, n, d);
    }
    // Triples (s, u, u+1); every stored pair feeds at least one of them.
    const int e = d * d;
    const auto pair_off = [n, e](int i, int j) {
        return (static_cast<std::int64_t>(i) * n - static_cast<std::int64_t>(i) * (i - 1) / 2 +
                (j - i)) * e;
    };
    ChenScanResult res;
    double best = -1.0;
    std::vector<double> dv(static_cast<size_t>(e));
    for (int u = 1; u + 1 < n; ++u) {
        const int t = u + 1;
        const double* wwut = ww + pair_off(u, t);
        for (int s = 0; s < u; ++s) {
            const double* wwst = ww + pair_off(s, t);
            const double* wwsu = ww + pair_off(s, u);
            for (int a = 0; a < d; ++a) {
                const double wsu = w[static_cast<std::int64_t>(u) * d + a] -
                                   w[static_cast<std::int64_t>(s) * d + a];
                for (int b = 0; b < d; ++b) {
                    const double wut = w[static_cast<std::int64_t>(t) * d + b] -
                                       w[static_cast<std::int64_t>(u) * d + b];
                    dv[static_cast<size_t>(a * d + b)] =
                        wwst[a * d + b] - wwsu[a * d + b] - wwut[a * d + b] - wsu * wut;
                }
            }
            const double val = detail::sumsq(dv.data(), e);
            if (val > best) {
                best = val;
                res.s = s;
                res.u = u;
                res.t = t;
            }
        }
    }
    res.max_residual = best > 0.0 ? std::sqrt(best) : 0.0;
    return res;
}

} // namespace rcm::kernels
