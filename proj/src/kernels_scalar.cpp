#include "kernels_internal.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace rcm::kernels::scalar {

using detail::sumsq;

double max_scaled_rownorm_diff(const double* vals, int n, int m, const double* w) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* ri = vals + static_cast<std::int64_t>(i) * m;
        for (int j = i + 1; j < n; ++j) {
            const double* rj = vals + static_cast<std::int64_t>(j) * m;
            double s;
            if (m == 1) {
                const double dd = rj[0] - ri[0];
                s = dd * dd;
            } else if (m == 2) {
                const double d0 = rj[0] - ri[0];
                const double d1 = rj[1] - ri[1];
                s = d0 * d0 + d1 * d1;
            } else if (m == 4) {
                const double d0 = rj[0] - ri[0];
                const double d1 = rj[1] - ri[1];
                const double d2 = rj[2] - ri[2];
                const double d3 = rj[3] - ri[3];
                s = (d0 * d0 + d1 * d1) + (d2 * d2 + d3 * d3);
            } else {
                s = 0.0;
                for (int k = 0; k < m; ++k) {
                    const double dd = rj[k] - ri[k];
                    s += dd * dd;
                }
            }
            const double scaled = s * w[j - i - 1];
            if (scaled > best) best = scaled;
        }
    }
    return std::sqrt(best);
}

double max_scaled_remainder(const double* y, const double* dmat, const double* w,
                            int n, int m, int d, const double* wgt) {
    double best = 0.0;
    std::vector<double> rr(static_cast<size_t>(m));
    for (int i = 0; i < n; ++i) {
        const double* yi = y + static_cast<std::int64_t>(i) * m;
        const double* Di = dmat + static_cast<std::int64_t>(i) * m * d;
        const double* wi = w + static_cast<std::int64_t>(i) * d;
        for (int j = i + 1; j < n; ++j) {
            const double* yj = y + static_cast<std::int64_t>(j) * m;
            const double* wj = w + static_cast<std::int64_t>(j) * d;
            for (int a = 0; a < m; ++a) {
                double acc = yj[a] - yi[a];
                const double* Da = Di + static_cast<std::int64_t>(a) * d;
                for (int b = 0; b < d; ++b) acc -= Da[b] * (wj[b] - wi[b]);
                rr[static_cast<size_t>(a)] = acc;
            }
            const double scaled = sumsq(rr.data(), m) * wgt[j - i - 1];
            if (scaled > best) best = scaled;
        }
    }
    return std::sqrt(best);
}

double max_scaled_pairnorm(const double* pairbuf, int n, int entry_size, const double* wgt) {
    double best = 0.0;
    const double* p = pairbuf;
    for (int i = 0; i < n; ++i) {
        p += entry_size; // skip diagonal (i,i)
        for (int j = i + 1; j < n; ++j) {
            const double scaled = sumsq(p, entry_size) * wgt[j - i - 1];
            if (scaled > best) best = scaled;
            p += entry_size;
        }
    }
    return std::sqrt(best);
}

ChenScanResult chen_scan_full(const double* w, const double* ww, int n, int d) {
    const int e = d * d;
    ChenScanResult res;
    double best = -1.0;
    std::vector<double> dv(static_cast<size_t>(e));
    const auto pair_off = [n, e](int i, int j) {
        return (static_cast<std::int64_t>(i) * n - static_cast<std::int64_t>(i) * (i - 1) / 2 +
                (j - i)) * e;
    };
    for (int s = 0; s < n; ++s) {
        for (int u = s + 1; u < n; ++u) {
            const double* wwsu = ww + pair_off(s, u);
            for (int t = u + 1; t < n; ++t) {
                const double* wwst = ww + pair_off(s, t);
                const double* wwut = ww + pair_off(u, t);
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
                const double val = sumsq(dv.data(), e);
                if (val > best) {
                    best = val;
                    res.s = s;
                    res.u = u;
                    res.t = t;
                }
            }
        }
    }
    res.max_residual = best > 0.0 ? std::sqrt(best) : 0.0;
    return res;
}

} // namespace rcm::kernels::scalar
