#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpkf/random.hpp"
#include "dpkf/types.hpp"

namespace dpkf {

/// Open interval; +-inf for unbounded sides. Scalar models share one
/// interval across coordinates.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool containsInterior(double v) const { return v > lo && v < hi; }
};

struct Moments {
    Vector mean;
    Matrix variance;
};

struct SupportError : std::domain_error {
    using std::domain_error::domain_error;
};

// A measurement-noise distribution, exposed through its negative log density
// r(v) = -log p(v) (exact, including the normalizing constant, so that
// integral of exp(-r) over the support is 1), the analytic gradient of r,
// the density modes, a sampler, and closed-form moments where they exist.
class NoiseModel {
  public:
    NoiseModel(std::string name, std::map<std::string, double> params, int dim, Interval support)
        : name_(std::move(name)), params_(std::move(params)), dim_(dim), support_(support) {}
    virtual ~NoiseModel() = default;

    const std::string& name() const { return name_; }
    const std::map<std::string, double>& params() const { return params_; }
    int dim() const { return dim_; }
    const Interval& support() const { return support_; }

    bool inSupportInterior(const Vector& v) const {
        for (int i = 0; i < v.size(); ++i)
            if (!support_.containsInterior(v[i])) return false;
        return true;
    }

    double negLogDensity(const Vector& v) const {
        checkArg(v);
        return negLogDensityImpl(v);
    }

    Vector gradNegLogDensity(const Vector& v) const {
        checkArg(v);
        return gradNegLogDensityImpl(v);
    }

    /// Local minimizers of r inside the closure of the support, ascending.
    /// A mode sitting on the support boundary (exponential) is included;
    /// stationarity of r only holds for interior modes.
    const std::vector<Vector>& modes() const { return modes_; }

    virtual Vector sample(Rng& rng) const = 0;

    /// Closed-form mean/variance; absent when undefined (Cauchy, Levy).
    const std::optional<Moments>& moments() const { return moments_; }

    /// Central location used for quadrature grids: mean when defined,
    /// otherwise the median.
    virtual double location() const { return moments_->mean[0]; }

    /// Standard-deviation equivalent for grid sizing: sqrt(variance) when
    /// defined, otherwise IQR/1.349.
    virtual double dispersion() const { return std::sqrt(moments_->variance(0, 0)); }

  protected:
    virtual double negLogDensityImpl(const Vector& v) const = 0;
    virtual Vector gradNegLogDensityImpl(const Vector& v) const = 0;

    void checkArg(const Vector& v) const {
        if (v.size() != dim_)
            throw DimensionError(name_ + ": dimension mismatch");
        if (!inSupportInterior(v))
            throw SupportError(name_ + ": point outside support interior");
    }

    std::string name_;
    std::map<std::string, double> params_;
    int dim_;
    Interval support_;
    std::vector<Vector> modes_;
    std::optional<Moments> moments_;
};

using NoiseModelPtr = std::shared_ptr<const NoiseModel>;

/// Factory for the built-in families. Omitted params fall back to the
/// built-in benchmark presets; see presetNames().
NoiseModelPtr makeDistribution(const std::string& name, const std::map<std::string, double>& params = {});

/// Names accepted by makeDistribution, in preset order.
const std::vector<std::string>& presetNames();

/// One-line human-readable parameter summary per preset.
std::string presetSummary(const std::string& name);

/// Multivariate Gaussian helper used for process noise and moment-matched
/// baselines.
struct GaussianSpec {
    Vector mean;
    Matrix cov;
};

NoiseModelPtr makeGaussian(const Vector& mean, const Matrix& cov);

}  // namespace dpkf
