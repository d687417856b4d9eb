#include "dpkf/dp_filter.hpp"

#include <cmath>
#include <limits>

namespace dpkf {

namespace {

// Central second difference of the scalar slice of r at the mode, used when
// vbar sits on top of the anchor and the defining ratio is 0/0. The limit of
// the ratio is the curvature of r at the mode.
double curvatureAtMode(const NoiseModel& model, const Vector& mode, int coord, double step, double margin) {
    Vector lo = mode, hi = mode;
    hi[coord] += step;
    lo[coord] -= step;
    // Keep the stencil inside the support (one-sided is fine for the floor case).
    if (!model.inSupportInterior(lo)) lo[coord] = mode[coord] + margin;
    if (!model.inSupportInterior(hi)) hi[coord] = mode[coord] + 2.0 * margin;
    const double gl = model.gradNegLogDensity(lo)[coord];
    const double gh = model.gradNegLogDensity(hi)[coord];
    return (gh - gl) / (hi[coord] - lo[coord]);
}

}  // namespace

AnchoredQuadratic anchorQuadratic(const NoiseModel& model, const Vector& vbarIn, const MrSafeguardConfig& cfg) {
    const auto& modes = model.modes();
    if (modes.empty()) throw std::logic_error("noise model exposes no mode");
    const int d = model.dim();

    // Support projection with epsilon margin, scaled by the mode magnitude.
    Vector vbar = vbarIn;
    const Interval& sup = model.support();
    for (int i = 0; i < d; ++i) {
        const double margin = cfg.epsilonMargin * (1.0 + std::abs(modes.front()[i]));
        if (std::isfinite(sup.lo)) vbar[i] = std::max(vbar[i], sup.lo + margin);
        if (std::isfinite(sup.hi)) vbar[i] = std::min(vbar[i], sup.hi - margin);
    }

    const Vector grad = model.gradNegLogDensity(vbar);

    Vector anchor(d);
    Vector geff = grad;
    Matrix mr = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        // Mode selection: with several modes, prefer one giving a positive
        // ratio, ties broken by distance to vbar.
        double best = modes.front()[i];
        if (modes.size() > 1) {
            double bestDist = std::numeric_limits<double>::infinity();
            bool found = false;
            for (const auto& m : modes) {
                const double denom = vbar[i] - m[i];
                const double dist = std::abs(denom);
                const bool positive = grad[i] * denom > 0.0;
                if (positive && dist < bestDist) {
                    best = m[i];
                    bestDist = dist;
                    found = true;
                }
            }
            if (!found) {
                // No positive ratio (gradient points at every mode); fall back
                // to the nearest mode, the curvature floor below takes over.
                for (const auto& m : modes)
                    if (std::abs(vbar[i] - m[i]) < std::abs(vbar[i] - best)) best = m[i];
            }
        }
        anchor[i] = best;

        const double denom = vbar[i] - anchor[i];
        double entry;
        bool exactRatio = false;
        if (std::abs(denom) < cfg.denomFloor) {
            const double margin = cfg.epsilonMargin * (1.0 + std::abs(anchor[i]));
            Vector modePoint = vbar;
            modePoint[i] = anchor[i];
            entry = curvatureAtMode(model, modePoint, i, cfg.denomFloor, margin);
        } else {
            entry = grad[i] / denom;
            exactRatio = entry > 0.0 && entry <= cfg.mrCap;
        }
        if (!(entry > 0.0) || !std::isfinite(entry)) entry = 1.0 / cfg.mrCap;
        mr(i, i) = std::min(entry, cfg.mrCap);
        // Where a safeguard altered the curvature, keep the model's gradient
        // consistent with it instead of the raw gradient, which can be
        // arbitrarily large at the epsilon-projected point (heavy one-sided
        // tails) and would otherwise throw the mean by grad/cap-sized jumps.
        if (!exactRatio) geff[i] = mr(i, i) * denom;
    }
    return {mr, vbar, anchor, geff};
}

GaussianBelief dpMeasurementUpdate(const GaussianBelief& pred, const LinearSystem& sys, const Vector& y,
                                   const MrSafeguardConfig& cfg) {
    const auto& model = *sys.measurementNoise;
    const Vector vbarRaw = y - sys.C * pred.mean;
    const AnchoredQuadratic aq = anchorQuadratic(model, vbarRaw, cfg);

    // Gain form of the information update P_t^{-1} = P'^{-1} + C^T Mr C
    // (Woodbury): P_t = P' - P' C^T (Mr^{-1} + C P' C^T)^{-1} C P'. The
    // subtracted term is PSD by construction, so the update never increases
    // the covariance even when curvature entries are near the cap, where the
    // double inversion of the information form loses that guarantee.
    const int d = sys.measDim();
    Matrix mrInv = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) mrInv(i, i) = 1.0 / aq.Mr(i, i);
    const Matrix cp = sys.C * pred.cov;
    const Matrix s = symmetrize(mrInv + cp * sys.C.transpose());
    const Matrix gain = pdSolve(s, cp).transpose();
    const Matrix post = symmetrize(pred.cov - gain * cp);
    const Vector mean = pred.mean + post * (sys.C.transpose() * aq.grad);
    if (!mean.allFinite() || !post.allFinite())
        throw DivergenceError("dp filter produced a non-finite state");
    return {mean, post};
}

GaussianBelief newtonPosteriorUpdate(const GaussianBelief& pred, const LinearSystem& sys, const Vector& y,
                                     const MrSafeguardConfig& cfg) {
    const auto& model = *sys.measurementNoise;
    const Vector vbarRaw = y - sys.C * pred.mean;
    const AnchoredQuadratic aq = anchorQuadratic(model, vbarRaw, cfg);

    // Objective in xi:
    //   1/2 (xi - mu')^T P'^{-1} (xi - mu') + 1/2 (yEff - C xi - anchor)^T Mr (yEff - C xi - anchor)
    //     + correction^T (yEff - C xi),
    // the quadratic term being the anchored model of r(yEff - C xi), with yEff
    // the measurement adjusted for the support projection (so that
    // yEff - C mu' is the projected innovation the gradient was evaluated at)
    // and `correction` carrying the safeguard clamps, zero when the curvature
    // entries are the exact gradient/offset ratios.
    // Stationarity: H xi = P'^{-1} mu' + C^T [Mr (yEff - anchor) + correction],
    // H = P'^{-1} + C^T Mr C.
    const Vector yEff = sys.C * pred.mean + aq.vbar;
    const Vector correction = aq.grad - aq.Mr * (aq.vbar - aq.anchor);
    const Matrix pinv = pdInverse(pred.cov);
    const Matrix hess = symmetrize(pinv + sys.C.transpose() * aq.Mr * sys.C);
    const Vector rhs = pinv * pred.mean + sys.C.transpose() * (aq.Mr * (yEff - aq.anchor) + correction);
    const Vector mean = pdSolve(hess, rhs);
    const Matrix post = symmetrize(pdInverse(hess));
    if (!mean.allFinite() || !post.allFinite())
        throw DivergenceError("newton posterior step produced a non-finite state");
    return {mean, post};
}

}  // namespace dpkf
