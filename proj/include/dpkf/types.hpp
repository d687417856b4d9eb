#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dpkf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct NotPositiveDefiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// (S + S^T)/2. Input must be square.
inline Matrix symmetrize(const Matrix& s) {
    if (s.rows() != s.cols())
        throw DimensionError("symmetrize: matrix is not square");
    return 0.5 * (s + s.transpose());
}

/// Cholesky factorization as the PD certificate; throws on failure.
inline Eigen::LLT<Matrix> choleskyOrThrow(const Matrix& s, const char* what = "matrix not positive definite") {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefiniteError(what);
    return llt;
}

inline bool isPositiveDefinite(const Matrix& s) {
    if (s.rows() != s.cols()) return false;
    if (!s.allFinite()) return false;
    return Eigen::LLT<Matrix>(s).info() == Eigen::Success;
}

/// Solves S x = b for symmetric positive definite S without forming S^{-1}.
template <typename Rhs>
auto pdSolve(const Matrix& s, const Rhs& b) {
    if (s.rows() != b.rows())
        throw DimensionError("pdSolve: dimension mismatch");
    return choleskyOrThrow(s, "pdSolve: matrix not positive definite").solve(b).eval();
}

/// Explicit inverse, for callers that must report a covariance.
inline Matrix pdInverse(const Matrix& s) {
    return pdSolve(s, Matrix(Matrix::Identity(s.rows(), s.cols())));
}

/// Symmetry check used when accepting externally supplied covariances.
inline void requireSymmetric(const Matrix& s, double relTol = 1e-12) {
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > relTol * scale)
        throw DimensionError("matrix is not symmetric");
}

}  // namespace dpkf
