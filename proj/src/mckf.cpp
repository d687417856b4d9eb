#include "dpkf/mckf.hpp"

#include <cmath>

namespace dpkf {

GaussianBelief mckfMeasurementUpdate(const GaussianBelief& pred, const LinearSystem& sys, const Vector& y,
                                     const MckfConfig& cfg, bool* converged) {
    const auto meas = momentMatched(*sys.measurementNoise);
    if (!meas)
        throw std::domain_error("mckf requires finite measurement-noise moments (" +
                                sys.measurementNoise->name() + " has none)");
    const int d = sys.measDim();
    const Eigen::LLT<Matrix> rChol = choleskyOrThrow(meas->cov, "mckf: measurement covariance not PD");
    if (converged) *converged = true;

    Vector xhat = pred.mean;
    GaussianBelief out = pred;
    bool done = false;
    for (int iter = 0; iter < cfg.fpMaxIter; ++iter) {
        const Vector resid = y - sys.C * xhat - meas->mean;
        const Vector e = rChol.matrixL().solve(resid);  // whitened innovation
        Vector weights(d);
        for (int i = 0; i < d; ++i)
            weights[i] = std::exp(-0.5 * e[i] * e[i] / (cfg.kernelSigma * cfg.kernelSigma));
        // Reweighted covariance R / lambda; weights can underflow on huge
        // outliers, floor them so the update stays defined.
        GaussianSpec reweighted = *meas;
        for (int i = 0; i < d; ++i) {
            const double s = 1.0 / std::sqrt(std::max(weights[i], 1e-300));
            reweighted.cov.row(i) *= s;
            reweighted.cov.col(i) *= s;
        }
        out = kfMeasurementUpdate(pred, sys.C, y, reweighted);
        const double shift = (out.mean - xhat).norm();
        xhat = out.mean;
        if (shift <= cfg.fpTol * (1.0 + xhat.norm())) {
            done = true;
            break;
        }
    }
    if (!done && converged) *converged = false;
    if (!out.mean.allFinite() || !out.cov.allFinite())
        throw DivergenceError("mckf produced a non-finite state");
    return out;
}

}  // namespace dpkf
