#include "oomcraft/numerics.hpp"

#include <Eigen/SVD>

#include <limits>
#include <sstream>

namespace oomcraft {

TruncatedSvd truncated_svd(const Matrix& a, int m) {
    ensure_finite(a, "truncated_svd input");
    const int kmax = static_cast<int>(std::min(a.rows(), a.cols()));
    if (m < 1 || m > kmax) {
        std::ostringstream msg;
        msg << "truncated_svd: rank target " << m << " outside [1, " << kmax << "]";
        throw InvalidInputError(msg.str());
    }
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    TruncatedSvd out;
    out.u = svd.matrixU().leftCols(m);
    out.sigma = svd.singularValues().head(m);
    out.v = svd.matrixV().leftCols(m);
    return out;
}

double default_pinv_tolerance(const Matrix& a, double largest_sv) {
    return 1e-12 * largest_sv * static_cast<double>(std::max(a.rows(), a.cols()));
}

Matrix pseudoinverse(const Matrix& a, double tol) {
    ensure_finite(a, "pseudoinverse input");
    if (a.rows() == 0 || a.cols() == 0) return Matrix::Zero(a.cols(), a.rows());
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    double cutoff = tol > 0.0 ? tol : default_pinv_tolerance(a, s.size() ? s(0) : 0.0);
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) inv(i) = 1.0 / s(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

PowerLimitResult matrix_power_limit(const Matrix& a, int max_iters, double tol) {
    if (a.rows() != a.cols())
        throw InvalidInputError("matrix_power_limit: matrix must be square");
    PowerLimitResult res;
    Matrix current = a;
    for (int k = 1; k <= max_iters; ++k) {
        Matrix next = current * a;
        if (!next.allFinite()) break;
        if ((next - current).cwiseAbs().maxCoeff() < tol) {
            res.value = current;
            res.iterations = k;
            res.converged = true;
            return res;
        }
        current.swap(next);
    }
    res.value = current;
    res.iterations = max_iters;
    res.converged = false;
    return res;
}

Matrix matrix_power(const Matrix& a, long k) {
    if (a.rows() != a.cols())
        throw InvalidInputError("matrix_power: matrix must be square");
    Matrix result = Matrix::Identity(a.rows(), a.cols());
    Matrix base = a;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

} // namespace oomcraft
