#pragma once

#include "dpkf/types.hpp"

namespace dpkf {

// Convex quadratic in homogeneous form:
//   g(x) = 1/2 [x;1]^T [[M, m],[m^T, gamma]] [x;1]
//        = 1/2 x^T M x + m^T x + gamma/2.
// The gamma entry is carried through conjugation identities but nothing in
// the estimator path reads it.
struct QuadraticForm {
    Matrix M;
    Vector m;
    double gamma = 0.0;

    int dim() const { return static_cast<int>(m.size()); }
};

inline double quadEval(const QuadraticForm& q, const Vector& x) {
    if (x.size() != q.m.size())
        throw DimensionError("quadEval: dimension mismatch");
    return 0.5 * x.dot(q.M * x) + q.m.dot(x) + 0.5 * q.gamma;
}

/// Fenchel conjugate of a strictly convex quadratic:
///   M* = M^{-1},  m* = -M^{-1} m,  gamma* = m^T M^{-1} m - gamma.
/// Requires M positive definite, otherwise the supremum is not finite.
inline QuadraticForm fenchelConjugate(const QuadraticForm& q) {
    auto llt = choleskyOrThrow(q.M, "fenchelConjugate: M not positive definite, conjugate not finite-valued");
    Vector minvM = llt.solve(q.m);
    QuadraticForm out;
    out.M = symmetrize(llt.solve(Matrix(Matrix::Identity(q.M.rows(), q.M.cols()))));
    out.m = -minvM;
    out.gamma = q.m.dot(minvM) - q.gamma;
    return out;
}

}  // namespace dpkf
