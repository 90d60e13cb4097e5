#pragma once

#include "rcm/kernels.hpp"

// Fixed summation trees shared by the scalar and SIMD paths. The m == 4 case
// uses pairwise association because that is what a horizontal add produces;
// the scalar reference must match it exactly.
namespace rcm::kernels::detail {

inline double sumsq(const double* p, int m) {
    switch (m) {
        case 1: return p[0] * p[0];
        case 2: return p[0] * p[0] + p[1] * p[1];
        case 4: return (p[0] * p[0] + p[1] * p[1]) + (p[2] * p[2] + p[3] * p[3]);
        default: {
            double acc = 0.0;
            for (int k = 0; k < m; ++k) acc += p[k] * p[k];
            return acc;
        }
    }
}

} // namespace rcm::kernels::detail

namespace rcm::kernels::scalar {

double max_scaled_rownorm_diff(const double* vals, int n, int m, const double* w);
double max_scaled_remainder(const double* y, const double* dmat, const double* w,
                            int n, int m, int d, const double* wgt);
double max_scaled_pairnorm(const double* pairbuf, int n, int entry_size, const double* wgt);
ChenScanResult chen_scan_full(const double* w, const double* ww, int n, int d);

} // namespace rcm::kernels::scalar

namespace rcm::kernels::avx2 {

double max_scaled_rownorm_diff(const double* vals, int n, int m, const double* w);
double max_scaled_remainder(const double* y, const double* dmat, const double* w,
                            int n, int m, int d, const double* wgt);
double max_scaled_pairnorm(const double* pairbuf, int n, int entry_size, const double* wgt);
ChenScanResult chen_scan_full(const double* w, const double* ww, int n, int d);

} // namespace rcm::kernels::avx2
