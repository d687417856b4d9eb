#include "dpkf/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpkf {

ParticleFilter::ParticleFilter(const LinearSystem& sys, int particleCount, const GaussianBelief& prior, Rng& rng)
    : sys_(sys),
      processChol_(choleskyOrThrow(sys.processNoise.cov, "particle filter: process covariance not PD")),
      summary_(prior) {
    if (particleCount < 1) throw std::invalid_argument("particle count must be >= 1");
    const Eigen::LLT<Matrix> priorChol = choleskyOrThrow(prior.cov, "particle filter: prior covariance not PD");
    const int n = sys.stateDim();
    particles_.resize(particleCount);
    weights_.assign(particleCount, 1.0 / particleCount);
    Vector z(n);
    for (auto& p : particles_) {
        for (int i = 0; i < n; ++i) z[i] = rng.normal();
        p = prior.mean + priorChol.matrixL() * z;
    }
}

void ParticleFilter::step(const Vector& y, Rng& rng) {
    const int n = sys_.stateDim();
    if (!first_) {
        Vector z(n);
        for (auto& p : particles_) {
            for (int i = 0; i < n; ++i) z[i] = rng.normal();
            p = sys_.A * p + sys_.processNoise.mean + processChol_.matrixL() * z;
        }
    }
    first_ = false;
    weightAndSummarize(y);
    systematicResample(rng);
}

void ParticleFilter::weightAndSummarize(const Vector& y) {
    const auto& model = *sys_.measurementNoise;
    const std::size_t count = particles_.size();
    // Log weights, shifted by the max before exponentiation.
    std::vector<double> logw(count);
    double maxLogw = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
        const Vector v = y - sys_.C * particles_[i];
        logw[i] = model.inSupportInterior(v) ? -model.negLogDensity(v)
                                             : -std::numeric_limits<double>::infinity();
        maxLogw = std::max(maxLogw, logw[i]);
    }
    double total = 0.0;
    if (std::isfinite(maxLogw)) {
        for (std::size_t i = 0; i < count; ++i) {
            weights_[i] = std::exp(logw[i] - maxLogw);
            total += weights_[i];
        }
    }
    if (!(total > 0.0)) {
        // Every particle fell outside the likelihood support; keep going with
        // uniform weights and record the degeneracy.
        weights_.assign(count, 1.0 / count);
        ++degeneracyResets_;
    } else {
        for (auto& w : weights_) w /= total;
    }

    Vector mean = Vector::Zero(sys_.stateDim());
    for (std::size_t i = 0; i < count; ++i) mean += weights_[i] * particles_[i];
    Matrix scatter = Matrix::Zero(sys_.stateDim(), sys_.stateDim());
    for (std::size_t i = 0; i < count; ++i) {
        const Vector d = particles_[i] - mean;
        scatter += weights_[i] * d * d.transpose();
    }
    summary_.mean = mean;
    summary_.cov = symmetrize(scatter);
}

void ParticleFilter::systematicResample(Rng& rng) {
    const std::size_t count = particles_.size();
    std::vector<Vector> resampled;
    resampled.reserve(count);
    const double start = rng.uniform() / count;
    double cumulative = weights_[0];
    std::size_t idx = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double target = start + static_cast<double>(i) / count;
        while (cumulative < target && idx + 1 < count) cumulative += weights_[++idx];
        resampled.push_back(particles_[idx]);
    }
    particles_ = std::move(resampled);
    weights_.assign(count, 1.0 / count);
}

}  // namespace dpkf
