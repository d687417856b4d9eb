#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dpkf {

// Deterministic generator used throughout the library. All samplers are
// implemented explicitly (not via std:: distributions) so that streams are
// reproducible across standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        double u;
        do {
            u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        } while (u <= 0.0);
        return u;
    }

    /// Standard normal via Box-Muller, one cached variate.
    double normal() {
        if (haveCached_) {
            haveCached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * M_PI * u2;
        cached_ = rad * std::sin(ang);
        haveCached_ = true;
        return rad * std::cos(ang);
    }

    /// Gamma(shape, scale) by the Marsaglia-Tsang squeeze, shape >= 1 path
    /// with the standard boost for shape < 1.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

  private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool haveCached_ = false;
};

/// SplitMix64 step, used to derive independent stream seeds.
inline std::uint64_t mixSeed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace dpkf
