#pragma once

#include "dpkf/dp_filter.hpp"
#include "dpkf/kalman.hpp"

namespace dpkf {

struct QuadratureConfig {
    int points = 50;
    double sigmas = 5.0;
};

/// Score-function measurement update (scalar measurements only). The
/// predicted-measurement density is computed on a grid by numerically
/// convolving the Gaussian pushforward N(C mu', C P' C^T) with the
/// measurement-noise density; the score and its derivative come from central
/// differences of the log density on that grid.
///
/// Throws DivergenceError when the updated covariance is not PD or the score
/// is not finite. `clampedToGrid`, when non-null, is set if the observed y
/// fell outside the grid and was clamped to its edge.
GaussianBelief masreliezMeasurementUpdate(const GaussianBelief& pred, const LinearSystem& sys, const Vector& y,
                                          const QuadratureConfig& quad, bool* clampedToGrid = nullptr);

inline GaussianBelief masreliezStep(const GaussianBelief& belief, const LinearSystem& sys, const Vector& y,
                                    const QuadratureConfig& quad, bool* clampedToGrid = nullptr) {
    return masreliezMeasurementUpdate(timeUpdate(belief, sys), sys, y, quad, clampedToGrid);
}

}  // namespace dpkf
