#pragma once

#include <vector>

#include "dpkf/kalman.hpp"

namespace dpkf {

/// Bootstrap particle filter: propagate through the dynamics with fresh
/// process noise, weight by the measurement likelihood exp(-r(y - C x)),
/// systematic resampling every step. The Gaussian summary (weighted mean and
/// scatter) is taken before resampling.
class ParticleFilter {
  public:
    ParticleFilter(const LinearSystem& sys, int particleCount, const GaussianBelief& prior, Rng& rng);

    /// One measurement step. The first call weights the prior particles
    /// without propagation (y_0 conditions the initial belief directly).
    void step(const Vector& y, Rng& rng);

    const GaussianBelief& belief() const { return summary_; }
    int degeneracyResets() const { return degeneracyResets_; }
    const std::vector<Vector>& particles() const { return particles_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    void weightAndSummarize(const Vector& y);
    void systematicResample(Rng& rng);

    const LinearSystem& sys_;
    Eigen::LLT<Matrix> processChol_;
    std::vector<Vector> particles_;
    std::vector<double> weights_;
    GaussianBelief summary_;
    bool first_ = true;
    int degeneracyResets_ = 0;
};

}  // namespace dpkf
