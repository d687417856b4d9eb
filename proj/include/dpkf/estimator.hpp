#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dpkf/dp_filter.hpp"
#include "dpkf/kalman.hpp"
#include "dpkf/masreliez.hpp"
#include "dpkf/mckf.hpp"

namespace dpkf {

struct EstimatorOptions {
    MrSafeguardConfig safeguards;
    QuadratureConfig quadrature;
    MckfConfig mckf;
    int particleCount = 1000;
};

/// Thrown when an estimator cannot run on a given noise model at all
/// (KF/MCKF under distributions without moments).
struct NotApplicableError : std::domain_error {
    using std::domain_error::domain_error;
};

// Sequential filtering interface used by the Monte Carlo harness. The first
// step conditions the initial belief on y_0 without propagation; dynamics
// propagation starts with the second measurement.
class Estimator {
  public:
    virtual ~Estimator() = default;
    virtual void initialize(const GaussianBelief& prior, Rng& rng) = 0;
    virtual void step(const Vector& y, Rng& rng) = 0;
    virtual const GaussianBelief& belief() const = 0;
    /// Count of soft anomalies (MCKF non-convergence, PF degeneracy resets,
    /// Masreliez off-grid clamps).
    virtual int flagCount() const { return 0; }
};

/// Names accepted by makeEstimator, in registry order.
const std::vector<std::string>& estimatorNames();

/// Builds a filter by registry name ("kf", "dpkf", "masreliez", "mckf",
/// "pf"). Throws NotApplicableError when the pairing with the system's
/// measurement noise is undefined, and std::invalid_argument for unknown
/// names.
std::unique_ptr<Estimator> makeEstimator(const std::string& name, const LinearSystem& sys,
                                         const EstimatorOptions& opts);

/// Numerical check of the prediction-step identity: the value-function
/// prediction computed through the conjugate-dual route (conjugate of the
/// Gaussian process-noise quadratic, shifted by the propagated prior,
/// conjugated back) must agree with the covariance-form prediction. Returns
/// the maximum absolute deviation of the two quadratics' x-dependent parts
/// over `probes` random points.
double predictionConjugacyGap(const Matrix& A, const GaussianBelief& prior, const GaussianSpec& processNoise,
                              Rng& rng, int probes = 100);

}  // namespace dpkf
