#include "kernels_internal.hpp"

#include <cmath>
#include <cstdint>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace rcm::kernels::avx2 {

#if defined(__AVX2__)

namespace {

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_max_pd(lo, hi);
    m = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
    return _mm_cvtsd_f64(m);
}

// m == 1: four pairs per vector.
double rownorm_m1(const double* vals, int n, const double* w) {
    __m256d bestv = _mm256_setzero_pd();
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        const __m256d vi = _mm256_set1_pd(vals[i]);
        int j = i + 1;
        for (; j + 3 < n; j += 4) {
            const __m256d vj = _mm256_loadu_pd(vals + j);
            const __m256d d = _mm256_sub_pd(vj, vi);
            const __m256d s = _mm256_mul_pd(d, d);
            const __m256d wv = _mm256_loadu_pd(w + (j - i - 1));
            bestv = _mm256_max_pd(bestv, _mm256_mul_pd(s, wv));
        }
        for (; j < n; ++j) {
            const double d = vals[j] - vals[i];
            const double sc = d * d * w[j - i - 1];
            if (sc > best) best = sc;
        }
    }
    best = std::max(best, hmax(bestv));
    return std::sqrt(best);
}

// m == 2: two interleaved rows per 256-bit load, four pairs per iteration.
double rownorm_m2(const double* vals, int n, const double* w) {
    __m256d bestv = _mm256_setzero_pd();
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        const __m256d vi = _mm256_setr_pd(vals[2 * i], vals[2 * i + 1], vals[2 * i], vals[2 * i + 1]);
        int j = i + 1;
        for (; j + 3 < n; j += 4) {
            const __m256d v1 = _mm256_loadu_pd(vals + 2 * j);       // rows j, j+1
            const __m256d v2 = _mm256_loadu_pd(vals + 2 * (j + 2)); // rows j+2, j+3
            const __m256d d1 = _mm256_sub_pd(v1, vi);
            const __m256d d2 = _mm256_sub_pd(v2, vi);
            const __m256d s1 = _mm256_mul_pd(d1, d1);
            const __m256d s2 = _mm256_mul_pd(d2, d2);
            // [|j|^2, |j+2|^2, |j+1|^2, |j+3|^2]
            const __m256d sums = _mm256_hadd_pd(s1, s2);
            const __m256d wv = _mm256_loadu_pd(w + (j - i - 1)); // [g, g+1, g+2, g+3]
            const __m256d wp = _mm256_permute4x64_pd(wv, _MM_SHUFFLE(3, 1, 2, 0));
            bestv = _mm256_max_pd(bestv, _mm256_mul_pd(sums, wp));
        }
        for (; j < n; ++j) {
            const double d0 = vals[2 * j] - vals[2 * i];
            const double d1 = vals[2 * j + 1] - vals[2 * i + 1];
            const double sc = (d0 * d0 + d1 * d1) * w[j - i - 1];
            if (sc > best) best = sc;
        }
    }
    best = std::max(best, hmax(bestv));
    return std::sqrt(best);
}

// One 4-entry row per vector; pairwise horizontal reduction.
inline double sumsq4(__m256d d) {
    const __m256d s = _mm256_mul_pd(d, d);
    const __m128d lo = _mm256_castpd256_pd128(s);
    const __m128d hi = _mm256_extractf128_pd(s, 1);
    const __m128d a = _mm_hadd_pd(lo, lo); // e0^2+e1^2
    const __m128d b = _mm_hadd_pd(hi, hi); // e2^2+e3^2
    return _mm_cvtsd_f64(_mm_add_sd(a, b));
}

double rownorm_m4(const double* vals, int n, const double* w) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        const __m256d vi = _mm256_loadu_pd(vals + 4 * i);
        for (int j = i + 1; j < n; ++j) {
            const __m256d vj = _mm256_loadu_pd(vals + 4 * j);
            const double sc = sumsq4(_mm256_sub_pd(vj, vi)) * w[j - i - 1];
            if (sc > best) best = sc;
        }
    }
    return std::sqrt(best);
}

double pairnorm_e1(const double* pairbuf, int n, const double* wgt) {
    __m256d bestv = _mm256_setzero_pd();
    double best = 0.0;
    const double* p = pairbuf;
    for (int i = 0; i < n; ++i) {
        p += 1;
        const int run = n - 1 - i;
        int j = 0;
        for (; j + 3 < run; j += 4) {
            const __m256d v = _mm256_loadu_pd(p + j);
            const __m256d s = _mm256_mul_pd(v, v);
            const __m256d wv = _mm256_loadu_pd(wgt + j);
            bestv = _mm256_max_pd(bestv, _mm256_mul_pd(s, wv));
        }
        for (; j < run; ++j) {
            const double sc = p[j] * p[j] * wgt[j];
            if (sc > best) best = sc;
        }
        p += run;
    }
    best = std::max(best, hmax(bestv));
    return std::sqrt(best);
}

double pairnorm_e4(const double* pairbuf, int n, const double* wgt) {
    double best = 0.0;
    const double* p = pairbuf;
    for (int i = 0; i < n; ++i) {
        p += 4;
        const int run = n - 1 - i;
        for (int j = 0; j < run; ++j) {
            const double sc = sumsq4(_mm256_loadu_pd(p + 4 * j)) * wgt[j];
            if (sc > best) best = sc;
        }
        p += 4 * static_cast<std::int64_t>(run);
    }
    return std::sqrt(best);
}

// m == 2, d == 1: remainder r = y_j - y_i - D_i (w_j - w_i), two pairs per vector.
double remainder_m2d1(const double* y, const double* dmat, const double* w, int n,
                      const double* wgt) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        const __m256d yi = _mm256_setr_pd(y[2 * i], y[2 * i + 1], y[2 * i], y[2 * i + 1]);
        const __m256d Di = _mm256_setr_pd(dmat[2 * i], dmat[2 * i + 1], dmat[2 * i], dmat[2 * i + 1]);
        const double wi = w[i];
        int j = i + 1;
        for (; j + 1 < n; j += 2) {
            const __m256d yj = _mm256_loadu_pd(y + 2 * j);
            const __m256d dw = _mm256_setr_pd(w[j] - wi, w[j] - wi, w[j + 1] - wi, w[j + 1] - wi);
            const __m256d r = _mm256_sub_pd(_mm256_sub_pd(yj, yi), _mm256_mul_pd(Di, dw));
            const __m256d s = _mm256_mul_pd(r, r);
            const __m128d lo = _mm256_castpd256_pd128(s);
            const __m128d hi = _mm256_extractf128_pd(s, 1);
            const __m128d sums = _mm_hadd_pd(lo, hi); // [pair j, pair j+1]
            const __m128d wv = _mm_loadu_pd(wgt + (j - i - 1));
            const __m128d sc = _mm_mul_pd(sums, wv);
            double tmp[2];
            _mm_storeu_pd(tmp, sc);
            if (tmp[0] > best) best = tmp[0];
            if (tmp[1] > best) best = tmp[1];
        }
        for (; j < n; ++j) {
            const double dw = w[j] - wi;
            const double r0 = y[2 * j] - y[2 * i] - dmat[2 * i] * dw;
            const double r1 = y[2 * j + 1] - y[2 * i + 1] - dmat[2 * i + 1] * dw;
            const double sc = (r0 * r0 + r1 * r1) * wgt[j - i - 1];
            if (sc > best) best = sc;
        }
    }
    return std::sqrt(best);
}

double remainder_m1d1(const double* y, const double* dmat, const double* w, int n,
                      const double* wgt) {
    __m256d bestv = _mm256_setzero_pd();
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        const __m256d yi = _mm256_set1_pd(y[i]);
        const __m256d Di = _mm256_set1_pd(dmat[i]);
        const __m256d wi = _mm256_set1_pd(w[i]);
        int j = i + 1;
        for (; j + 3 < n; j += 4) {
            const __m256d yj = _mm256_loadu_pd(y + j);
            const __m256d wj = _mm256_loadu_pd(w + j);
            const __m256d r = _mm256_sub_pd(_mm256_sub_pd(yj, yi),
                                            _mm256_mul_pd(Di, _mm256_sub_pd(wj, wi)));
            const __m256d s = _mm256_mul_pd(r, r);
            const __m256d wv = _mm256_loadu_pd(wgt + (j - i - 1));
            bestv = _mm256_max_pd(bestv, _mm256_mul_pd(s, wv));
        }
        for (; j < n; ++j) {
            const double r = y[j] - y[i] - dmat[i] * (w[j] - w[i]);
            const double sc = r * r * wgt[j - i - 1];
            if (sc > best) best = sc;
        }
    }
    best = std::max(best, hmax(bestv));
    return std::sqrt(best);
}

// d == 2 Chen scan; one 2x2 tensor per vector.
ChenScanResult chen_d2(const double* w, const double* ww, int n) {
    ChenScanResult res;
    double best = -1.0;
    const auto pair_off = [n](int i, int j) {
        return (static_cast<std::int64_t>(i) * n - static_cast<std::int64_t>(i) * (i - 1) / 2 +
                (j - i)) * 4;
    };
    for (int s = 0; s < n; ++s) {
        for (int u = s + 1; u < n; ++u) {
            const __m256d wwsu = _mm256_loadu_pd(ww + pair_off(s, u));
            const double a0 = w[2 * u] - w[2 * s];
            const double a1 = w[2 * u + 1] - w[2 * s + 1];
            const __m256d av = _mm256_setr_pd(a0, a0, a1, a1);
            const double* pst = ww + pair_off(s, u + 1);
            const double* put = ww + pair_off(u, u + 1);
            double run_best = -1.0;
            int run_t = -1;
            for (int t = u + 1; t < n; ++t) {
                const __m256d wwst = _mm256_loadu_pd(pst);
                const __m256d wwut = _mm256_loadu_pd(put);
                const double b0 = w[2 * t] - w[2 * u];
                const double b1 = w[2 * t + 1] - w[2 * u + 1];
                const __m256d bv = _mm256_setr_pd(b0, b1, b0, b1);
                const __m256d dvec = _mm256_sub_pd(
                    _mm256_sub_pd(_mm256_sub_pd(wwst, wwsu), wwut), _mm256_mul_pd(av, bv));
                const double val = sumsq4(dvec);
                if (val > run_best) {
                    run_best = val;
                    run_t = t;
                }
                pst += 4;
                put += 4;
            }
            if (run_best > best) {
                best = run_best;
                res.s = s;
                res.u = u;
                res.t = run_t;
            }
        }
    }
    res.max_residual = best > 0.0 ? std::sqrt(best) : 0.0;
    return res;
}

} // namespace

double max_scaled_rownorm_diff(const double* vals, int n, int m, const double* w) {
    switch (m) {
        case 1: return rownorm_m1(vals, n, w);
        case 2: return rownorm_m2(vals, n, w);
        case 4: return rownorm_m4(vals, n, w);
        default: return scalar::max_scaled_rownorm_diff(vals, n, m, w);
    }
}

double max_scaled_remainder(const double* y, const double* dmat, const double* w,
                            int n, int m, int d, const double* wgt) {
    if (m == 1 && d == 1) return remainder_m1d1(y, dmat, w, n, wgt);
    if (m == 2 && d == 1) return remainder_m2d1(y, dmat, w, n, wgt);
    return scalar::max_scaled_remainder(y, dmat, w, n, m, d, wgt);
}

double max_scaled_pairnorm(const double* pairbuf, int n, int entry_size, const double* wgt) {
    switch (entry_size) {
        case 1: return pairnorm_e1(pairbuf, n, wgt);
        case 4: return pairnorm_e4(pairbuf, n, wgt);
        default: return scalar::max_scaled_pairnorm(pairbuf, n, entry_size, wgt);
    }
}

ChenScanResult chen_scan_full(const double* w, const double* ww, int n, int d) {
    if (d == 2) return chen_d2(w, ww, n);
    return scalar::chen_scan_full(w, ww, n, d);
}

#else // !__AVX2__: forward everything to the scalar reference.

double max_scaled_rownorm_diff(const double* vals, int n, int m, const double* w) {
    return scalar::max_scaled_rownorm_diff(vals, n, m, w);
}
double max_scaled_remainder(const double* y, const double* dmat, const double* w,
                            int n, int m, int d, const double* wgt) {
    return scalar::max_scaled_remainder(y, dmat, w, n, m, d, wgt);
}
double max_scaled_pairnorm(const double* pairbuf, int n, int entry_size, const double* wgt) {
    return scalar::max_scaled_pairnorm(pairbuf, n, entry_size, wgt);
}
ChenScanResult chen_scan_full(const double* w, const double* ww, int n, int d) {
    return scalar::chen_scan_full(w, ww, n, d);
}

#endif

} // namespace rcm::kernels::avx2
