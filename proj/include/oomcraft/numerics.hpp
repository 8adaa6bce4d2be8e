#pragma once

#include "oomcraft/core.hpp"

namespace oomcraft {

/// Rank-m factorization a ~ u * sigma.asDiagonal() * v^T with orthonormal
/// columns and nonincreasing singular values.
struct TruncatedSvd {
    Matrix u;      // rows(a) x m
    Vector sigma;  // m, nonincreasing, >= 0
    Matrix v;      // cols(a) x m

    Matrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

/// Best rank-m approximation of a in Frobenius norm.
/// Ties at the truncation boundary keep the first m in the computed order.
TruncatedSvd truncated_svd(const Matrix& a, int m);

/// Default relative cutoff for treating singular values as zero.
double default_pinv_tolerance(const Matrix& a, double largest_sv);

/// Moore-Penrose pseudoinverse. Singular values below tol are dropped;
/// tol <= 0 selects the default eps-scaled cutoff.
Matrix pseudoinverse(const Matrix& a, double tol = -1.0);

struct PowerLimitResult {
    Matrix value;   // a^k for the first k with ||a^{k+1} - a^k||_max < tol
    int iterations = 0;
    bool converged = false;
};

/// Repeated-multiplication fixed point of a^k, or converged=false after
/// max_iters. Diagnostic/oracle helper, not on the learning path.
PowerLimitResult matrix_power_limit(const Matrix& a, int max_iters, double tol);

/// Integer matrix power by repeated squaring, k >= 0.
Matrix matrix_power(const Matrix& a, long k);

} // namespace oomcraft
