#pragma once

#include "dpkf/dp_filter.hpp"
#include "dpkf/kalman.hpp"

namespace dpkf {

struct MckfConfig {
    double kernelSigma = 5.0;
    double fpTol = 1e-6;
    int fpMaxIter = 100;
};

/// Correntropy-weighted measurement update: fixed-point iteration that
/// shrinks the effective measurement precision by a Gaussian kernel weight
/// of the whitened innovation. Requires moment-matched measurement
/// covariance; throws if the noise has no moments.
///
/// `converged`, when non-null, reports whether the fixed point was reached
/// within fpMaxIter iterations.
GaussianBelief mckfMeasurementUpdate(const GaussianBelief& pred, const LinearSystem& sys, const Vector& y,
                                     const MckfConfig& cfg, bool* converged = nullptr);

inline GaussianBelief mckfStep(const GaussianBelief& belief, const LinearSystem& sys, const Vector& y,
                               const MckfConfig& cfg, bool* converged = nullptr) {
    return mckfMeasurementUpdate(timeUpdate(belief, sys), sys, y, cfg, converged);
}

}  // namespace dpkf
