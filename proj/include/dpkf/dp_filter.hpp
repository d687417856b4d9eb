#pragma once

#include "dpkf/kalman.hpp"

namespace dpkf {

/// Safeguards making the mode-anchored curvature total: support projection
/// margin, a floor on |vbar - mode| below which the ratio is replaced by the
/// curvature at the mode, and a cap on the diagonal entries.
struct MrSafeguardConfig {
    double epsilonMargin = 1e-6;
    double denomFloor = 1e-8;
    double mrCap = 1e8;
};

struct DivergenceError : std::runtime_error {
    int step;
    explicit DivergenceError(const std::string& what, int stepIndex = -1)
        : std::runtime_error(what), step(stepIndex) {}
};

/// Mode-anchored diagonal quadratic model of the measurement negative log
/// density around vbar: curvature Mr with Mr (vbar - mode) = grad r(vbar),
/// plus the support-projected point the gradient is evaluated at.
struct AnchoredQuadratic {
    Matrix Mr;         // diagonal, PD
    Vector vbar;       // projected into the support interior
    Vector anchor;     // per-coordinate selected mode
    Vector grad;       // gradient of the quadratic model at vbar: the raw
                       // grad r(vbar) where the curvature is the exact
                       // gradient/offset ratio, Mr (vbar - anchor) where a
                       // safeguard clamped the entry (keeps the model
                       // internally consistent, bounding the mean step)
};

AnchoredQuadratic anchorQuadratic(const NoiseModel& model, const Vector& vbar, const MrSafeguardConfig& cfg);

/// Diagonal curvature matrix alone (the anchored quadratic's Hessian).
inline Matrix modeAnchoredCurvature(const NoiseModel& model, const Vector& vbar, const MrSafeguardConfig& cfg) {
    return anchorQuadratic(model, vbar, cfg).Mr;
}

/// Measurement update of the proposed filter: information update with the
/// mode-anchored curvature (computed in gain form for numerical
/// monotonicity), mean moved along C^T grad r(vbar).
GaussianBelief dpMeasurementUpdate(const GaussianBelief& pred, const LinearSystem& sys, const Vector& y,
                                   const MrSafeguardConfig& cfg);

/// Full step: time update then dpMeasurementUpdate.
inline GaussianBelief dpStep(const GaussianBelief& belief, const LinearSystem& sys, const Vector& y,
                             const MrSafeguardConfig& cfg) {
    return dpMeasurementUpdate(timeUpdate(belief, sys), sys, y, cfg);
}

/// Newton-like route: minimizes the quadratic model of the negative
/// log-posterior (prior quadratic plus the anchored quadratic of the
/// measurement term) in closed form, returning minimizer and inverse
/// Hessian. Agrees with dpMeasurementUpdate.
GaussianBelief newtonPosteriorUpdate(const GaussianBelief& pred, const LinearSystem& sys, const Vector& y,
                                     const MrSafeguardConfig& cfg);

inline GaussianBelief newtonPosteriorStep(const GaussianBelief& belief, const LinearSystem& sys, const Vector& y,
                                          const MrSafeguardConfig& cfg) {
    return newtonPosteriorUpdate(timeUpdate(belief, sys), sys, y, cfg);
}

}  // namespace dpkf
