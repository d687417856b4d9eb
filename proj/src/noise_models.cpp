#include "dpkf/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace dpkf {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double logNormPdf(double z) { return -0.5 * z * z - 0.5 * kLog2Pi; }

// log Phi(x), stable in the left tail.
double logNormCdf(double x) {
    if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    // Asymptotic expansion Phi(x) ~ phi(x)/(-x) (1 - 1/x^2 + 3/x^4).
    const double x2 = x * x;
    return logNormPdf(x) - std::log(-x) + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// Inverse Mills ratio phi(x)/Phi(x).
double millsRatio(double x) {
    if (x > -30.0) return std::exp(logNormPdf(x) - logNormCdf(x));
    const double x2 = x * x;
    return -x / (1.0 - 1.0 / x2 + 3.0 / (x2 * x2));
}

Vector scalar(double v) {
    Vector out(1);
    out[0] = v;
    return out;
}

// Dense scan over [lo, hi] followed by golden-section refinement of each
// local minimum of f. Used for families without a closed-form mode.
std::vector<double> findLocalMinima(const std::function<double(double)>& f, double lo, double hi) {
    constexpr int kScan = 4000;
    constexpr double kTol = 1e-11;
    std::vector<double> xs(kScan + 1), fs(kScan + 1);
    for (int i = 0; i <= kScan; ++i) {
        xs[i] = lo + (hi - lo) * i / kScan;
        fs[i] = f(xs[i]);
    }
    std::vector<double> minima;
    for (int i = 1; i < kScan; ++i) {
        if (fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1] && (fs[i] < fs[i - 1] || fs[i] < fs[i + 1])) {
            double a = xs[i - 1], b = xs[i + 1];
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            double c = b - gr * (b - a), d = a + gr * (b - a);
            double fc = f(c), fd = f(d);
            while (b - a > kTol * (1.0 + std::abs(a) + std::abs(b))) {
                if (fc < fd) {
                    b = d; d = c; fd = fc;
                    c = b - gr * (b - a); fc = f(c);
                } else {
                    a = c; c = d; fc = fd;
                    d = a + gr * (b - a); fd = f(d);
                }
            }
            minima.push_back(0.5 * (a + b));
        }
    }
    std::sort(minima.begin(), minima.end());
    return minima;
}

double getParam(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void requirePositive(double v, const std::string& what) {
    if (!(v > 0.0)) throw std::invalid_argument(what + " must be positive");
}

class GaussianNoise final : public NoiseModel {
  public:
    GaussianNoise(const Vector& mean, const Matrix& cov)
        : NoiseModel("gaussian", {}, static_cast<int>(mean.size()), Interval{}),
          mean_(mean), llt_(choleskyOrThrow(symmetrize(cov), "gaussian: covariance not PD")) {
        if (mean.size() == 1) {
            params_["mean"] = mean[0];
            params_["var"] = cov(0, 0);
        }
        Matrix covSym = symmetrize(cov);
        double logDet = 0.0;
        for (int i = 0; i < mean.size(); ++i) logDet += 2.0 * std::log(llt_.matrixL()(i, i));
        constant_ = 0.5 * (mean.size() * kLog2Pi + logDet);
        modes_ = {mean};
        moments_ = Moments{mean, covSym};
    }

    double negLogDensityImpl(const Vector& v) const override {
        Vector d = v - mean_;
        return 0.5 * d.dot(llt_.solve(d)) + constant_;
    }
    Vector gradNegLogDensityImpl(const Vector& v) const override { return llt_.solve(v - mean_); }
    Vector sample(Rng& rng) const override {
        Vector z(dim_);
        for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
        return mean_ + llt_.matrixL() * z;
    }

  private:
    Vector mean_;
    Eigen::LLT<Matrix> llt_;
    double constant_;
};

class SkewNormalNoise final : public NoiseModel {
  public:
    SkewNormalNoise(double xi, double omega, double alpha)
        : NoiseModel("skew_normal", {{"xi", xi}, {"omega", omega}, {"alpha", alpha}}, 1, Interval{}),
          xi_(xi), omega_(omega), alpha_(alpha) {
        requirePositive(omega, "skew_normal omega");
        const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
        const double mean = xi + omega * delta * std::sqrt(2.0 / std::numbers::pi);
        const double var = omega * omega * (1.0 - 2.0 * delta * delta / std::numbers::pi);
        moments_ = Moments{scalar(mean), Matrix::Constant(1, 1, var)};
        auto r1 = [this](double v) { return this->r1d(v); };
        for (double m : findLocalMinima(r1, xi - 8.0 * omega, xi + 8.0 * omega))
            modes_.push_back(scalar(m));
        delta_ = delta;
    }

    double negLogDensityImpl(const Vector& v) const override { return r1d(v[0]); }
    Vector gradNegLogDensityImpl(const Vector& v) const override {
        const double z = (v[0] - xi_) / omega_;
        return scalar((z - alpha_ * millsRatio(alpha_ * z)) / omega_);
    }
    Vector sample(Rng& rng) const override {
        const double u0 = rng.normal();
        const double u1 = rng.normal();
        const double z = delta_ * std::abs(u0) + std::sqrt(1.0 - delta_ * delta_) * u1;
        return scalar(xi_ + omega_ * z);
    }

  private:
    double r1d(double v) const {
        const double z = (v - xi_) / omega_;
        return std::log(omega_) - std::numbers::ln2 - logNormPdf(z) - logNormCdf(alpha_ * z);
    }
    double xi_, omega_, alpha_, delta_;
};

class GaussianMixtureNoise final : public NoiseModel {
  public:
    GaussianMixtureNoise(std::string name, double a1, double a2, double mu1, double mu2, double var1, double var2)
        : NoiseModel(std::move(name), {{"a1", a1}, {"a2", a2}, {"mu1", mu1}, {"mu2", mu2}, {"var1", var1}, {"var2", var2}},
                     1, Interval{}),
          a_{a1, a2}, mu_{mu1, mu2}, var_{var1, var2} {
        requirePositive(var1, "mixture var1");
        requirePositive(var2, "mixture var2");
        if (std::abs(a1 + a2 - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
        const double mean = a1 * mu1 + a2 * mu2;
        const double var = a1 * (var1 + mu1 * mu1) + a2 * (var2 + mu2 * mu2) - mean * mean;
        moments_ = Moments{scalar(mean), Matrix::Constant(1, 1, var)};
        const double spread = std::sqrt(std::max(var1, var2));
        const double lo = std::min(mu1, mu2) - 6.0 * spread;
        const double hi = std::max(mu1, mu2) + 6.0 * spread;
        auto r1 = [this](double v) { return this->r1d(v); };
        for (double m : findLocalMinima(r1, lo, hi)) modes_.push_back(scalar(m));
    }

    double negLogDensityImpl(const Vector& v) const override { return r1d(v[0]); }
    Vector gradNegLogDensityImpl(const Vector& v) const override {
        // grad r = (sum_i w_i (v-mu_i)/var_i) / (sum_i w_i), w_i the
        // component densities; computed via responsibilities for stability.
        double l0 = compLogDensity(0, v[0]), l1 = compLogDensity(1, v[0]);
        const double lmax = std::max(l0, l1);
        const double w0 = std::exp(l0 - lmax), w1 = std::exp(l1 - lmax);
        const double g = (w0 * (v[0] - mu_[0]) / var_[0] + w1 * (v[0] - mu_[1]) / var_[1]) / (w0 + w1);
        return scalar(g);
    }
    Vector sample(Rng& rng) const override {
        const int i = rng.uniform() < a_[0] ? 0 : 1;
        return scalar(mu_[i] + std::sqrt(var_[i]) * rng.normal());
    }

  private:
    double compLogDensity(int i, double v) const {
        return std::log(a_[i]) - 0.5 * std::log(var_[i]) + logNormPdf((v - mu_[i]) / std::sqrt(var_[i]));
    }
    double r1d(double v) const {
        double l0 = compLogDensity(0, v), l1 = compLogDensity(1, v);
        const double lmax = std::max(l0, l1);
        return -(lmax + std::log(std::exp(l0 - lmax) + std::exp(l1 - lmax)));
    }
    double a_[2], mu_[2], var_[2];
};

class GammaNoise final : public NoiseModel {
  public:
    GammaNoise(double alpha, double theta)
        : NoiseModel("gamma", {{"alpha", alpha}, {"theta", theta}}, 1, Interval{0.0, std::numeric_limits<double>::infinity()}),
          alpha_(alpha), theta_(theta) {
        requirePositive(alpha, "gamma alpha");
        requirePositive(theta, "gamma theta");
        if (alpha > 1.0) modes_ = {scalar((alpha - 1.0) * theta)};
        else modes_ = {scalar(0.0)};  // boundary mode
        moments_ = Moments{scalar(alpha * theta), Matrix::Constant(1, 1, alpha * theta * theta)};
    }

    double negLogDensityImpl(const Vector& v) const override {
        return std::lgamma(alpha_) + alpha_ * std::log(theta_) - (alpha_ - 1.0) * std::log(v[0]) + v[0] / theta_;
    }
    Vector gradNegLogDensityImpl(const Vector& v) const override {
        return scalar(-(alpha_ - 1.0) / v[0] + 1.0 / theta_);
    }
    Vector sample(Rng& rng) const override { return scalar(rng.gamma(alpha_, theta_)); }

  private:
    double alpha_, theta_;
};

class CauchyNoise final : public NoiseModel {
  public:
    CauchyNoise(double x0, double gamma)
        : NoiseModel("cauchy", {{"x0", x0}, {"gamma", gamma}}, 1, Interval{}), x0_(x0), gamma_(gamma) {
        requirePositive(gamma, "cauchy gamma");
        modes_ = {scalar(x0)};
    }

    double negLogDensityImpl(const Vector& v) const override {
        const double d = v[0] - x0_;
        return std::log(std::numbers::pi) - std::log(gamma_) + std::log(d * d + gamma_ * gamma_);
    }
    Vector gradNegLogDensityImpl(const Vector& v) const override {
        const double d = v[0] - x0_;
        return scalar(2.0 * d / (d * d + gamma_ * gamma_));
    }
    Vector sample(Rng& rng) const override {
        return scalar(x0_ + gamma_ * std::tan(std::numbers::pi * (rng.uniform() - 0.5)));
    }
    double location() const override { return x0_; }
    double dispersion() const override { return 2.0 * gamma_ / 1.349; }

  private:
    double x0_, gamma_;
};

class BetaPrimeNoise final : public NoiseModel {
  public:
    BetaPrimeNoise(double alpha, double beta)
        : NoiseModel("beta_prime", {{"alpha", alpha}, {"beta", beta}}, 1,
                     Interval{0.0, std::numeric_limits<double>::infinity()}),
          alpha_(alpha), beta_(beta),
          logB_(std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta)) {
        requirePositive(alpha, "beta_prime alpha");
        requirePositive(beta, "beta_prime beta");
        if (alpha >= 1.0) modes_ = {scalar((alpha - 1.0) / (beta + 1.0))};
        else modes_ = {scalar(0.0)};
        if (beta > 2.0) {
            const double mean = alpha / (beta - 1.0);
            const double var = alpha * (alpha + beta - 1.0) / ((beta - 2.0) * (beta - 1.0) * (beta - 1.0));
            moments_ = Moments{scalar(mean), Matrix::Constant(1, 1, var)};
        }
    }

    double negLogDensityImpl(const Vector& v) const override {
        return logB_ - (alpha_ - 1.0) * std::log(v[0]) + (alpha_ + beta_) * std::log1p(v[0]);
    }
    Vector gradNegLogDensityImpl(const Vector& v) const override {
        return scalar(-(alpha_ - 1.0) / v[0] + (alpha_ + beta_) / (1.0 + v[0]));
    }
    Vector sample(Rng& rng) const override {
        const double x = rng.gamma(alpha_, 1.0);
        const double y = rng.gamma(beta_, 1.0);
        return scalar(x / y);
    }

  private:
    double alpha_, beta_, logB_;
};

class ExponentialNoise final : public NoiseModel {
  public:
    explicit ExponentialNoise(double lambda)
        : NoiseModel("exponential", {{"lambda", lambda}}, 1, Interval{0.0, std::numeric_limits<double>::infinity()}),
          lambda_(lambda) {
        requirePositive(lambda, "exponential lambda");
        modes_ = {scalar(0.0)};  // density maximized at the support boundary
        moments_ = Moments{scalar(1.0 / lambda), Matrix::Constant(1, 1, 1.0 / (lambda * lambda))};
    }

    double negLogDensityImpl(const Vector& v) const override { return lambda_ * v[0] - std::log(lambda_); }
    Vector gradNegLogDensityImpl(const Vector&) const override { return scalar(lambda_); }
    Vector sample(Rng& rng) const override { return scalar(-std::log(rng.uniform()) / lambda_); }

  private:
    double lambda_;
};

class LevyNoise final : public NoiseModel {
  public:
    LevyNoise(double mu, double c)
        : NoiseModel("levy", {{"mu", mu}, {"c", c}}, 1, Interval{mu, std::numeric_limits<double>::infinity()}),
          mu_(mu), c_(c) {
        requirePositive(c, "levy c");
        modes_ = {scalar(mu + c / 3.0)};
    }

    double negLogDensityImpl(const Vector& v) const override {
        const double s = v[0] - mu_;
        return -0.5 * std::log(c_ / (2.0 * std::numbers::pi)) + 1.5 * std::log(s) + 0.5 * c_ / s;
    }
    Vector gradNegLogDensityImpl(const Vector& v) const override {
        const double s = v[0] - mu_;
        return scalar(1.5 / s - 0.5 * c_ / (s * s));
    }
    Vector sample(Rng& rng) const override {
        double z;
        do { z = rng.normal(); } while (z == 0.0);
        return scalar(mu_ + c_ / (z * z));
    }
    // Quantile(p) = mu + c / qnorm(1 - p/2)^2; median and IQR follow.
    double location() const override { return mu_ + c_ / (0.67448975019608171 * 0.67448975019608171); }
    double dispersion() const override {
        const double q1 = c_ / (1.1503493803760079 * 1.1503493803760079);
        const double q3 = c_ / (0.31863936396437516 * 0.31863936396437516);
        return (q3 - q1) / 1.349;
    }

  private:
    double mu_, c_;
};

}  // namespace

const std::vector<std::string>& presetNames() {
    static const std::vector<std::string> names = {
        "gaussian", "skew_normal", "bimodal_gm", "gamma", "impulsive_gm",
        "cauchy", "beta_prime", "exponential", "levy"};
    return names;
}

NoiseModelPtr makeGaussian(const Vector& mean, const Matrix& cov) {
    return std::make_shared<GaussianNoise>(mean, cov);
}

NoiseModelPtr makeDistribution(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "gaussian") {
        const double mean = getParam(params, "mean", 0.0);
        const double var = getParam(params, "var", 3.0);
        requirePositive(var, "gaussian var");
        return makeGaussian(Vector::Constant(1, mean), Matrix::Constant(1, 1, var));
    }
    if (name == "skew_normal")
        return std::make_shared<SkewNormalNoise>(getParam(params, "xi", -2.0063),
                                                 getParam(params, "omega", 2.6505),
                                                 getParam(params, "alpha", 3.0));
    if (name == "bimodal_gm")
        return std::make_shared<GaussianMixtureNoise>("bimodal_gm",
                                                      getParam(params, "a1", 0.4), getParam(params, "a2", 0.6),
                                                      getParam(params, "mu1", -1.8), getParam(params, "mu2", 1.2),
                                                      getParam(params, "var1", 0.9), getParam(params, "var2", 0.8));
    if (name == "impulsive_gm")
        return std::make_shared<GaussianMixtureNoise>("impulsive_gm",
                                                      getParam(params, "a1", 0.1), getParam(params, "a2", 0.9),
                                                      getParam(params, "mu1", 0.0), getParam(params, "mu2", 0.0),
                                                      getParam(params, "var1", 25.0), getParam(params, "var2", 0.5556));
    if (name == "gamma")
        return std::make_shared<GammaNoise>(getParam(params, "alpha", 2.0),
                                            getParam(params, "theta", std::sqrt(1.5)));
    if (name == "cauchy")
        return std::make_shared<CauchyNoise>(getParam(params, "x0", 0.0), getParam(params, "gamma", 1.0));
    if (name == "beta_prime")
        return std::make_shared<BetaPrimeNoise>(getParam(params, "alpha", 2.0), getParam(params, "beta", 2.7891));
    if (name == "exponential")
        return std::make_shared<ExponentialNoise>(getParam(params, "lambda", 1.0 / std::sqrt(3.0)));
    if (name == "levy")
        return std::make_shared<LevyNoise>(getParam(params, "mu", 1.0), getParam(params, "c", 3.0));
    std::ostringstream oss;
    oss << "unknown distribution '" << name << "'; valid names:";
    for (const auto& n : presetNames()) oss << " " << n;
    throw std::invalid_argument(oss.str());
}

std::string presetSummary(const std::string& name) {
    auto model = makeDistribution(name);
    std::ostringstream oss;
    oss << name;
    for (const auto& [k, v] : model->params()) oss << "  " << k << "=" << v;
    return oss.str();
}

}  // namespace dpkf
