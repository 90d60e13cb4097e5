#pragma once

#include <cstdint>

// Hot pairwise reductions behind the grid/rough-path estimators. Each kernel
// has a scalar reference implementation and an AVX2 variant selected at
// runtime; the two must agree bit-for-bit (see tests/test_kernels.cpp), which
// is why the kernel translation units are built with FP contraction off.
namespace rcm::kernels {

bool have_avx2();

// Force the scalar path (used by the equivalence tests).
void set_force_scalar(bool on);
bool force_scalar();

// max over pairs i < j of ||row_j - row_i||_2 * w[j-i-1].
// vals: n x m row-major, w: n-1 gap weights.
double max_scaled_rownorm_diff(const double* vals, int n, int m, const double* w);

// max over pairs i < j of ||row_j - row_i - D_i * (w_j - w_i)||_2 * wgt[j-i-1]
// where rows are m-vectors, D_i is an m x d matrix (row-major, one per i) and
// w rows are d-vectors. This is the controlled-path remainder reduction.
double max_scaled_remainder(const double* y, const double* dmat, const double* w,
                            int n, int m, int d, const double* wgt);

// max over stored pairs (i,j), i < j, of ||entry(i,j)||_2 * wgt[j-i-1].
// pairbuf: upper-triangular pair-major storage, entry_size doubles per pair.
double max_scaled_pairnorm(const double* pairbuf, int n, int entry_size, const double* wgt);

// Same reductions restricted to dyadic gaps (j - i a power of two).
double max_scaled_rownorm_diff_dyadic(const double* vals, int n, int m, const double* w);
double max_scaled_remainder_dyadic(const double* y, const double* dmat, const double* w,
                                   int n, int m, int d, const double* wgt);
double max_scaled_pairnorm_dyadic(const double* pairbuf, int n, int entry_size, const double* wgt);

struct ChenScanResult {
    double max_residual = 0.0;
    int s = 0, u = 0, t = 0;
};

// Chen residual |WW(s,t) - WW(s,u) - WW(u,t) - W(s,u) x W(u,t)|_F over triples.
// `spanning` restricts to triples (s, u, u+1); the full max is bounded by
// (2n+1) times the spanning max via the telescoping identity
// D(s,u,t_k) = D(s,u,t_{k-1}) + D(s,t_{k-1},t_k) - D(u,t_{k-1},t_k).
ChenScanResult chen_scan(const double* w, const double* ww, int n, int d, bool spanning);

} // namespace rcm::kernels
