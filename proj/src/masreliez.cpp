#include "dpkf/masreliez.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dpkf {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

GaussianBelief masreliezMeasurementUpdate(const GaussianBelief& pred, const LinearSystem& sys, const Vector& y,
                                          const QuadratureConfig& quad, bool* clampedToGrid) {
    if (sys.measDim() != 1)
        throw std::invalid_argument("masreliez update supports scalar measurements only");
    if (quad.points < 5)
        throw std::invalid_argument("masreliez quadrature needs at least 5 grid points");
    const auto& model = *sys.measurementNoise;
    if (clampedToGrid) *clampedToGrid = false;

    const double zMean = (sys.C * pred.mean)(0);
    const double s2 = (sys.C * pred.cov * sys.C.transpose())(0, 0);
    const double sPush = std::sqrt(s2);
    const double sdTotal = std::sqrt(s2 + model.dispersion() * model.dispersion());
    const double center = zMean + model.location();

    const int J = quad.points;
    const double yLo = center - quad.sigmas * sdTotal;
    const double dy = 2.0 * quad.sigmas * sdTotal / (J - 1);

    // Quadrature nodes for the Gaussian pushforward of the state.
    const int K = quad.points;
    const double zLo = zMean - quad.sigmas * sPush;
    const double dz = 2.0 * quad.sigmas * sPush / (K - 1);
    std::vector<double> zNode(K), zLogW(K);
    for (int k = 0; k < K; ++k) {
        zNode[k] = zLo + k * dz;
        const double u = (zNode[k] - zMean) / sPush;
        zLogW[k] = -0.5 * u * u - 0.5 * kLog2Pi - std::log(sPush);
    }

    // log p(y_j) by log-sum-exp over the convolution sum.
    std::vector<double> logp(J);
    Vector v(1);
    std::vector<double> terms(K);
    for (int j = 0; j < J; ++j) {
        const double yj = yLo + j * dy;
        double maxTerm = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            v[0] = yj - zNode[k];
            double t = -std::numeric_limits<double>::infinity();
            if (model.inSupportInterior(v)) t = zLogW[k] - model.negLogDensity(v);
            terms[k] = t;
            maxTerm = std::max(maxTerm, t);
        }
        if (!std::isfinite(maxTerm)) {
            logp[j] = -std::numeric_limits<double>::infinity();
            continue;
        }
        double acc = 0.0;
        for (int k = 0; k < K; ++k) acc += std::exp(terms[k] - maxTerm);
        logp[j] = maxTerm + std::log(acc) + std::log(dz);
    }

    // Score g = -d/dy log p and its derivative G on interior nodes.
    std::vector<double> score(J, 0.0), dScore(J, 0.0);
    for (int j = 1; j + 1 < J; ++j) {
        score[j] = -(logp[j + 1] - logp[j - 1]) / (2.0 * dy);
        dScore[j] = -(logp[j + 1] - 2.0 * logp[j] + logp[j - 1]) / (dy * dy);
    }

    // Locate y on the interior of the grid, clamping to the edge if needed.
    double yObs = y(0);
    const double yMin = yLo + dy, yMax = yLo + (J - 2) * dy;
    if (yObs < yMin || yObs > yMax) {
        yObs = std::clamp(yObs, yMin, yMax);
        if (clampedToGrid) *clampedToGrid = true;
    }
    const int j0 = std::min(J - 3, std::max(1, static_cast<int>((yObs - yLo) / dy)));
    const double frac = (yObs - (yLo + j0 * dy)) / dy;
    const double g = score[j0] + frac * (score[j0 + 1] - score[j0]);
    const double gPrime = dScore[j0] + frac * (dScore[j0 + 1] - dScore[j0]);
    if (!std::isfinite(g) || !std::isfinite(gPrime))
        throw DivergenceError("masreliez score not finite");

    const Vector pc = pred.cov * sys.C.transpose();  // n x 1
    const Vector mean = pred.mean + pc * g;
    const Matrix post = symmetrize(pred.cov - pc * gPrime * pc.transpose());
    if (!mean.allFinite() || !post.allFinite() || !isPositiveDefinite(post))
        throw DivergenceError("masreliez update lost positive definiteness");
    return {mean, post};
}

}  // namespace dpkf
