#include "dpkf/estimator.hpp"

#include <sstream>

#include "dpkf/particle_filter.hpp"
#include "dpkf/quadratic_form.hpp"

namespace dpkf {

namespace {

class KfEstimator final : public Estimator {
  public:
    KfEstimator(const LinearSystem& sys) : sys_(sys) {
        const auto meas = momentMatched(*sys.measurementNoise);
        if (!meas)
            throw NotApplicableError("kf requires finite measurement-noise moments (" +
                                     sys.measurementNoise->name() + " has none)");
        meas_ = *meas;
    }
    void initialize(const GaussianBelief& prior, Rng&) override {
        belief_ = prior;
        first_ = true;
    }
    void step(const Vector& y, Rng&) override {
        const GaussianBelief pred = first_ ? belief_ : timeUpdate(belief_, sys_);
        first_ = false;
        belief_ = kfMeasurementUpdate(pred, sys_.C, y, meas_);
    }
    const GaussianBelief& belief() const override { return belief_; }

  private:
    LinearSystem sys_;
    GaussianSpec meas_;
    GaussianBelief belief_;
    bool first_ = true;
};

class DpEstimator final : public Estimator {
  public:
    DpEstimator(const LinearSystem& sys, const MrSafeguardConfig& cfg) : sys_(sys), cfg_(cfg) {}
    void initialize(const GaussianBelief& prior, Rng&) override {
        belief_ = prior;
        first_ = true;
    }
    void step(const Vector& y, Rng&) override {
        const GaussianBelief pred = first_ ? belief_ : timeUpdate(belief_, sys_);
        first_ = false;
        belief_ = dpMeasurementUpdate(pred, sys_, y, cfg_);
    }
    const GaussianBelief& belief() const override { return belief_; }

  private:
    LinearSystem sys_;
    MrSafeguardConfig cfg_;
    GaussianBelief belief_;
    bool first_ = true;
};

class MasreliezEstimator final : public Estimator {
  public:
    MasreliezEstimator(const LinearSystem& sys, const QuadratureConfig& quad) : sys_(sys), quad_(quad) {
        if (sys.measDim() != 1)
            throw NotApplicableError("masreliez filter supports scalar measurements only");
    }
    void initialize(const GaussianBelief& prior, Rng&) override {
        belief_ = prior;
        first_ = true;
        clamps_ = 0;
    }
    void step(const Vector& y, Rng&) override {
        const GaussianBelief pred = first_ ? belief_ : timeUpdate(belief_, sys_);
        first_ = false;
        bool clamped = false;
        belief_ = masreliezMeasurementUpdate(pred, sys_, y, quad_, &clamped);
        if (clamped) ++clamps_;
    }
    const GaussianBelief& belief() const override { return belief_; }
    int flagCount() const override { return clamps_; }

  private:
    LinearSystem sys_;
    QuadratureConfig quad_;
    GaussianBelief belief_;
    bool first_ = true;
    int clamps_ = 0;
};

class MckfEstimator final : public Estimator {
  public:
    MckfEstimator(const LinearSystem& sys, const MckfConfig& cfg) : sys_(sys), cfg_(cfg) {
        if (!momentMatched(*sys.measurementNoise))
            throw NotApplicableError("mckf requires finite measurement-noise moments (" +
                                     sys.measurementNoise->name() + " has none)");
    }
    void initialize(const GaussianBelief& prior, Rng&) override {
        belief_ = prior;
        first_ = true;
        nonConverged_ = 0;
    }
    void step(const Vector& y, Rng&) override {
        const GaussianBelief pred = first_ ? belief_ : timeUpdate(belief_, sys_);
        first_ = false;
        bool converged = true;
        belief_ = mckfMeasurementUpdate(pred, sys_, y, cfg_, &converged);
        if (!converged) ++nonConverged_;
    }
    const GaussianBelief& belief() const override { return belief_; }
    int flagCount() const override { return nonConverged_; }

  private:
    LinearSystem sys_;
    MckfConfig cfg_;
    GaussianBelief belief_;
    bool first_ = true;
    int nonConverged_ = 0;
};

class PfEstimator final : public Estimator {
  public:
    PfEstimator(const LinearSystem& sys, int particleCount) : sys_(sys), particleCount_(particleCount) {}
    void initialize(const GaussianBelief& prior, Rng& rng) override {
        pf_ = std::make_unique<ParticleFilter>(sys_, particleCount_, prior, rng);
    }
    void step(const Vector& y, Rng& rng) override { pf_->step(y, rng); }
    const GaussianBelief& belief() const override { return pf_->belief(); }
    int flagCount() const override { return pf_ ? pf_->degeneracyResets() : 0; }

  private:
    LinearSystem sys_;
    int particleCount_;
    std::unique_ptr<ParticleFilter> pf_;
};

}  // namespace

const std::vector<std::string>& estimatorNames() {
    static const std::vector<std::string> names = {"kf", "dpkf", "masreliez", "mckf", "pf"};
    return names;
}

std::unique_ptr<Estimator> makeEstimator(const std::string& name, const LinearSystem& sys,
                                         const EstimatorOptions& opts) {
    if (name == "kf") return std::make_unique<KfEstimator>(sys);
    if (name == "dpkf") return std::make_unique<DpEstimator>(sys, opts.safeguards);
    if (name == "masreliez") return std::make_unique<MasreliezEstimator>(sys, opts.quadrature);
    if (name == "mckf") return std::make_unique<MckfEstimator>(sys, opts.mckf);
    if (name == "pf") return std::make_unique<PfEstimator>(sys, opts.particleCount);
    std::ostringstream oss;
    oss << "unknown estimator '" << name << "'; valid names:";
    for (const auto& n : estimatorNames()) oss << " " << n;
    throw std::invalid_argument(oss.str());
}

double predictionConjugacyGap(const Matrix& A, const GaussianBelief& prior, const GaussianSpec& processNoise,
                              Rng& rng, int probes) {
    const int n = static_cast<int>(A.rows());

    // Dual route: conjugate of the process-noise quadratic, shifted by the
    // quadratic carrying A P A^T and A mu, conjugated back.
    const Matrix sigmaInv = pdInverse(processNoise.cov);
    QuadraticForm q{symmetrize(sigmaInv), -sigmaInv * processNoise.mean,
                    processNoise.mean.dot(sigmaInv * processNoise.mean)};
    QuadraticForm qStar = fenchelConjugate(q);
    QuadraticForm pStar;
    pStar.M = symmetrize(qStar.M + A * prior.cov * A.transpose());
    pStar.m = qStar.m + A * prior.mean;
    pStar.gamma = qStar.gamma;
    const QuadraticForm dualRoute = fenchelConjugate(pStar);

    // Direct route: covariance-form prediction.
    const Matrix pPred = symmetrize(processNoise.cov + A * prior.cov * A.transpose());
    const Vector muPred = A * prior.mean + processNoise.mean;
    const Matrix pPredInv = symmetrize(pdInverse(pPred));
    const QuadraticForm direct{pPredInv, -pPredInv * muPred, 0.0};

    // Compare the x-dependent parts; the constant entries are carried but
    // not meaningful on the direct route.
    const Vector zero = Vector::Zero(n);
    const double c1 = quadEval(dualRoute, zero);
    const double c2 = quadEval(direct, zero);
    double maxDev = 0.0;
    Vector x(n);
    for (int p = 0; p < probes; ++p) {
        for (int i = 0; i < n; ++i) x[i] = 4.0 * (rng.uniform() - 0.5);
        const double d1 = quadEval(dualRoute, x) - c1;
        const double d2 = quadEval(direct, x) - c2;
        maxDev = std::max(maxDev, std::abs(d1 - d2));
    }
    return maxDev;
}

}  // namespace dpkf
