#pragma once

#include "dpkf/noise_model.hpp"
#include "dpkf/types.hpp"

namespace dpkf {

struct GaussianBelief {
    Vector mean;
    Matrix cov;

    GaussianBelief() = default;
    GaussianBelief(Vector mu, Matrix p) : mean(std::move(mu)), cov(std::move(p)) {
        if (!mean.allFinite()) throw std::invalid_argument("belief mean not finite");
        requireSymmetric(cov);
        choleskyOrThrow(cov, "belief covariance not positive definite");
    }
};

struct LinearSystem {
    Matrix A;                      // n x n state transition
    Matrix C;                      // d x n measurement map
    GaussianSpec processNoise;     // w_t ~ N(mean, cov)
    NoiseModelPtr measurementNoise;

    int stateDim() const { return static_cast<int>(A.rows()); }
    int measDim() const { return static_cast<int>(C.rows()); }
};

/// Prediction: P' = Sigma_w + A P A^T, mu' = A mu + mu_w.
inline GaussianBelief timeUpdate(const GaussianBelief& belief, const LinearSystem& sys) {
    return {sys.A * belief.mean + sys.processNoise.mean,
            symmetrize(sys.processNoise.cov + sys.A * belief.cov * sys.A.transpose())};
}

/// Information-form measurement update against a Gaussian measurement model:
///   P^{-1} = P'^{-1} + C^T R^{-1} C,
///   mu = mu' + P C^T R^{-1} (y - C mu' - mu_v).
inline GaussianBelief kfMeasurementUpdate(const GaussianBelief& pred, const Matrix& C, const Vector& y,
                                          const GaussianSpec& meas) {
    const Matrix rinvC = pdSolve(meas.cov, C);
    const Matrix info = pdInverse(pred.cov) + C.transpose() * rinvC;
    const Matrix post = symmetrize(pdInverse(symmetrize(info)));
    const Vector innovation = y - C * pred.mean - meas.mean;
    return {pred.mean + post * (rinvC.transpose() * innovation), post};
}

/// Moment-matched Gaussian for a noise model; absent when the moments are
/// undefined (Cauchy, Levy).
inline std::optional<GaussianSpec> momentMatched(const NoiseModel& model) {
    if (!model.moments()) return std::nullopt;
    return GaussianSpec{model.moments()->mean, model.moments()->variance};
}

}  // namespace dpkf
