// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria 6-8 share one full benchmark sweep, so the whole
// binary takes several minutes on a single core.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dpkf/experiment.hpp"
#include "dpkf/particle_filter.hpp"
#include "dpkf/quadratic_form.hpp"

using namespace dpkf;

namespace {

int failures = 0;

void report(int index, const std::string& label, bool pass, const std::string& detail = "") {
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << index << "] " << label;
    if (!detail.empty()) std::cout << " — " << detail;
    std::cout << std::endl;
    if (!pass) ++failures;
}

double seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vector vec1(double a) {
    Vector v(1);
    v << a;
    return v;
}

Matrix randomSpd(int n, Rng& rng) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    return symmetrize(g * g.transpose() + 0.2 * Matrix::Identity(n, n));
}

Matrix randomMatrix(int n, Rng& rng) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    return g;
}

Vector randomVector(int n, Rng& rng) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

double relDiff(const GaussianBelief& x, const GaussianBelief& y) {
    const double meanScale = 1.0 + std::max(x.mean.norm(), y.mean.norm());
    const double covScale = 1.0 + std::max(x.cov.norm(), y.cov.norm());
    return std::max((x.mean - y.mean).norm() / meanScale, (x.cov - y.cov).norm() / covScale);
}

LinearSystem benchmarkSystem(const std::string& noise) {
    ExperimentConfig cfg = ExperimentConfig::benchmark();
    cfg.noiseName = noise;
    return makeSystem(cfg);
}

const std::vector<std::string>& benchmarkPresets() {
    static const std::vector<std::string> presets = {"skew_normal", "bimodal_gm", "gamma", "impulsive_gm",
                                                     "cauchy",      "beta_prime", "exponential", "levy"};
    return presets;
}

// ---- 1. Gaussian reduction of the proposed filter to the KF -------------

void criterion1() {
    const auto start = std::chrono::steady_clock::now();
    LinearSystem sys = benchmarkSystem("gaussian");
    const GaussianSpec meas = *momentMatched(*sys.measurementNoise);
    MrSafeguardConfig cfg;
    Rng rng(mixSeed(1001));
    GaussianBelief dp{Vector::Zero(2), Matrix::Identity(2, 2)};
    GaussianBelief kf = dp;
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const Vector y = sys.C * randomVector(2, rng) + sys.measurementNoise->sample(rng);
        dp = dpStep(dp, sys, y, cfg);
        kf = kfMeasurementUpdate(timeUpdate(kf, sys), sys.C, y, meas);
        worst = std::max(worst, relDiff(dp, kf));
    }
    const double elapsed = seconds(start);
    std::ostringstream detail;
    detail << "max rel dev " << worst << ", " << elapsed << " s";
    report(1, "Gaussian noise: proposed filter equals the KF to 1e-10 over 200 steps",
           worst <= 1e-10 && elapsed < 1.0, detail.str());
}

// ---- 2. Newton-route equivalence ----------------------------------------

void criterion2() {
    const auto start = std::chrono::steady_clock::now();
    MrSafeguardConfig cfg;
    Rng rng(mixSeed(1002));
    double worst = 0.0;
    int instances = 0;
    while (instances < 100) {
        for (const auto& name : benchmarkPresets()) {
            LinearSystem sys = benchmarkSystem(name);
            GaussianBelief belief{randomVector(2, rng), randomSpd(2, rng)};
            const Vector y = sys.C * belief.mean + sys.measurementNoise->sample(rng);
            worst = std::max(worst, relDiff(dpStep(belief, sys, y, cfg), newtonPosteriorStep(belief, sys, y, cfg)));
            ++instances;
        }
    }
    const double elapsed = seconds(start);
    std::ostringstream detail;
    detail << instances << " instances, max rel dev " << worst << ", " << elapsed << " s";
    report(2, "Newton posterior route equals the proposed step to 1e-9", worst <= 1e-9 && elapsed < 10.0,
           detail.str());
}

// ---- 3. Prediction-step conjugate-duality oracle ------------------------

void criterion3() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(mixSeed(1003));
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.bits() % 4);
        worst = std::max(worst, predictionConjugacyGap(randomMatrix(n, rng), {randomVector(n, rng), randomSpd(n, rng)},
                                                       {randomVector(n, rng), randomSpd(n, rng)}, rng));
    }
    const double elapsed = seconds(start);
    std::ostringstream detail;
    detail << "max gap " << worst << ", " << elapsed << " s";
    report(3, "Dual-route prediction matches covariance-form prediction to 1e-8",
           worst <= 1e-8 && elapsed < 30.0, detail.str());
}

// ---- 4. Conjugation of quadratics ---------------------------------------

void criterion4() {
    Rng rng(mixSeed(1004));
    double worstDouble = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.bits() % 4);
        QuadraticForm q{randomSpd(n, rng), randomVector(n, rng), rng.normal()};
        const QuadraticForm back = fenchelConjugate(fenchelConjugate(q));
        worstDouble = std::max({worstDouble, (back.M - q.M).norm(), (back.m - q.m).norm(),
                                std::abs(back.gamma - q.gamma)});
    }

    // 1-D conjugate against a brute-force supremum on a grid.
    QuadraticForm q{Matrix::Constant(1, 1, 2.0), vec1(-1.0), 0.5};
    const QuadraticForm conj = fenchelConjugate(q);
    double worstGrid = 0.0;
    const double step = 1e-3;
    for (double s = -6.0; s <= 6.0; s += 0.5) {
        double sup = -std::numeric_limits<double>::infinity();
        for (double x = -50.0; x <= 50.0; x += step)
            sup = std::max(sup, s * x - quadEval(q, vec1(x)));
        worstGrid = std::max(worstGrid, std::abs(sup - quadEval(conj, vec1(s))));
    }
    std::ostringstream detail;
    detail << "double-conjugation dev " << worstDouble << ", grid dev " << worstGrid;
    report(4, "Conjugate of a PD quadratic: involution to 1e-8, matches grid supremum",
           worstDouble <= 1e-8 && worstGrid <= 2.0 * step, detail.str());
}

// ---- 5. Analytic gradients vs finite differences ------------------------

void criterion5() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(mixSeed(1005));
    double worst = 0.0;
    std::vector<std::string> all = benchmarkPresets();
    all.push_back("gaussian");
    for (const auto& name : all) {
        auto model = makeDistribution(name);
        int accepted = 0;
        while (accepted < 100) {
            const double lo = model->support().lo, hi = model->support().hi;
            const bool bounded = lo > -1e308;
            const double v = bounded ? lo + 1e-3 + 8.0 * rng.uniform() : 16.0 * (rng.uniform() - 0.5);
            const double h = 1e-6 * (1.0 + std::abs(v));
            if (!(v - h > lo && v + h < hi)) continue;
            const double grad = model->gradNegLogDensity(vec1(v))[0];
            const double fd =
                (model->negLogDensity(vec1(v + h)) - model->negLogDensity(vec1(v - h))) / (2.0 * h);
            worst = std::max(worst, std::abs(grad - fd) / (1.0 + std::abs(fd)));
            ++accepted;
        }
    }
    const double elapsed = seconds(start);
    std::ostringstream detail;
    detail << "max rel dev " << worst << ", " << elapsed << " s";
    report(5, "Analytic noise gradients match central differences to 1e-5", worst <= 1e-5 && elapsed < 5.0,
           detail.str());
}

// ---- 6/7/8. Full benchmark sweep ----------------------------------------

struct SweepCell {
    double rmseMean = std::numeric_limits<double>::quiet_NaN();
    double time = std::numeric_limits<double>::quiet_NaN();
    std::string status = "missing";
};

std::map<std::string, std::map<std::string, SweepCell>> runSweep() {
    std::map<std::string, std::map<std::string, SweepCell>> sweep;
    for (const auto& noise : benchmarkPresets()) {
        ExperimentConfig cfg = ExperimentConfig::benchmark();
        cfg.noiseName = noise;
        cfg.measureTime = true;
        std::cerr << "  sweep: " << noise << "..." << std::endl;
        const ExperimentResult result = runMonteCarlo(cfg);
        for (const auto& cell : result.table)
            sweep[noise][cell.estimator] = {cell.rmseMean, cell.timeGeomeanNorm, cell.status};
    }
    return sweep;
}

void criterion6(const std::map<std::string, std::map<std::string, SweepCell>>& sweep) {
    std::ostringstream detail;
    bool pass = true;
    auto near = [&](const std::string& noise, const std::string& est, double target) {
        const SweepCell& c = sweep.at(noise).at(est);
        const bool ok = c.status == "ok" && std::abs(c.rmseMean - target) <= 0.02;
        if (!ok) pass = false;
        detail << noise << "/" << est << "=" << c.rmseMean << (ok ? "" : "(!)") << " ";
        return c.rmseMean;
    };
    auto ordered = [&](const std::string& noise, double factor) {
        const SweepCell& ours = sweep.at(noise).at("dpkf");
        const SweepCell& kf = sweep.at(noise).at("kf");
        if (!(ours.status == "ok" && kf.status == "ok" && ours.rmseMean <= factor * kf.rmseMean)) {
            pass = false;
            detail << noise << " ordering(!) ";
        }
    };
    near("skew_normal", "kf", 0.213);
    near("skew_normal", "dpkf", 0.205);
    ordered("skew_normal", 1.0);
    near("impulsive_gm", "dpkf", 0.177);
    ordered("impulsive_gm", 0.90);
    near("gamma", "dpkf", 0.198);
    ordered("gamma", 1.0);
    near("beta_prime", "dpkf", 0.184);
    ordered("beta_prime", 1.0);
    for (const std::string& noise : {"cauchy", "levy"})
        for (const std::string& est : {"kf", "mckf"})
            if (sweep.at(noise).at(est).status != "na") {
                pass = false;
                detail << noise << "/" << est << " not na(!) ";
            }
    report(6, "Benchmark table matches the reference values within 0.02", pass, detail.str());
}

void criterion7(const std::map<std::string, std::map<std::string, SweepCell>>& sweep) {
    std::ostringstream detail;
    bool pass = true;
    for (const auto& [noise, cells] : sweep) {
        const SweepCell& pf = cells.at("pf");
        const SweepCell& ours = cells.at("dpkf");
        if (pf.status != "ok" || ours.status != "ok") continue;
        const bool ok = pf.rmseMean <= ours.rmseMean + 0.015;
        if (!ok) pass = false;
        detail << noise << ":pf=" << pf.rmseMean << " ours=" << ours.rmseMean << (ok ? "" : "(!)") << " ";
    }
    report(7, "Particle filter is the minimum-RMSE baseline (within 0.015)", pass, detail.str());
}

void criterion8(const std::map<std::string, std::map<std::string, SweepCell>>& sweep) {
    std::map<std::string, std::pair<double, int>> logSums;
    for (const auto& [noise, cells] : sweep)
        for (const auto& [est, cell] : cells)
            if (cell.status == "ok" && std::isfinite(cell.time) && cell.time > 0.0) {
                logSums[est].first += std::log(cell.time);
                logSums[est].second += 1;
            }
    auto geomean = [&](const std::string& est) {
        const auto it = logSums.find(est);
        if (it == logSums.end() || it->second.second == 0) return std::numeric_limits<double>::quiet_NaN();
        return std::exp(it->second.first / it->second.second);
    };
    const double ours = geomean("dpkf"), mckf = geomean("mckf"), mas = geomean("masreliez"), pf = geomean("pf");
    const bool pass = ours <= 2.5 && mckf >= 3.0 && mas >= 10.0 && pf >= 20.0;
    std::ostringstream detail;
    detail << "ours=" << ours << " mckf=" << mckf << " masreliez=" << mas << " pf=" << pf << " (KF = 1)";
    report(8, "Normalized runtimes keep the expected ordering", pass, detail.str());
}

// ---- 9. Masreliez Gaussian limit ----------------------------------------

void criterion9() {
    LinearSystem sys = benchmarkSystem("gaussian");
    const GaussianSpec meas = *momentMatched(*sys.measurementNoise);
    QuadratureConfig quad;
    Rng rng(mixSeed(1009));
    GaussianBelief mas{Vector::Zero(2), Matrix::Identity(2, 2)};
    GaussianBelief kf = mas;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Vector y = sys.C * randomVector(2, rng) + sys.measurementNoise->sample(rng);
        mas = masreliezStep(mas, sys, y, quad);
        kf = kfMeasurementUpdate(timeUpdate(kf, sys), sys.C, y, meas);
        worst = std::max({worst, (mas.mean - kf.mean).cwiseAbs().maxCoeff(),
                          (mas.cov - kf.cov).cwiseAbs().maxCoeff()});
    }
    std::ostringstream detail;
    detail << "max component dev " << worst;
    report(9, "Masreliez update matches the KF under Gaussian noise within 1e-3", worst <= 1e-3, detail.str());
}

// ---- 10. MCKF Gaussian limit --------------------------------------------

void criterion10() {
    LinearSystem sys = benchmarkSystem("impulsive_gm");
    const GaussianSpec meas = *momentMatched(*sys.measurementNoise);
    MckfConfig cfg;
    cfg.kernelSigma = 1e9;
    Rng rng(mixSeed(1010));
    GaussianBelief mc{Vector::Zero(2), Matrix::Identity(2, 2)};
    GaussianBelief kf = mc;
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const Vector y = sys.C * randomVector(2, rng) + sys.measurementNoise->sample(rng);
        mc = mckfMeasurementUpdate(timeUpdate(mc, sys), sys, y, cfg);
        kf = kfMeasurementUpdate(timeUpdate(kf, sys), sys.C, y, meas);
        worst = std::max({worst, (mc.mean - kf.mean).cwiseAbs().maxCoeff(),
                          (mc.cov - kf.cov).cwiseAbs().maxCoeff()});
    }
    std::ostringstream detail;
    detail << "max component dev " << worst;
    report(10, "MCKF with a huge kernel reproduces the KF within 1e-6", worst <= 1e-6, detail.str());
}

// ---- 11. Particle-filter oracle -----------------------------------------

void criterion11() {
    LinearSystem sys = benchmarkSystem("gaussian");
    const GaussianSpec meas = *momentMatched(*sys.measurementNoise);
    const int particles = 100000;
    const int steps = 10, reps = 30;
    const GaussianBelief prior{Vector::Zero(2), Matrix::Identity(2, 2)};

    // One fixed measurement sequence; the exact posterior mean from the KF.
    Rng trajRng(mixSeed(2000));
    auto traj = simulate(sys, prior, steps, trajRng);
    std::vector<GaussianBelief> kfMeans;
    GaussianBelief kf = prior;
    for (int t = 0; t <= steps; ++t) {
        kf = kfMeasurementUpdate(t == 0 ? kf : timeUpdate(kf, sys), sys.C, traj.measurements[t], meas);
        kfMeans.push_back(kf);
    }

    // 30 independent particle-filter repetitions; the Monte Carlo standard
    // error of the PF mean comes from the scatter across the repetitions.
    std::vector<std::vector<Vector>> pfMeans(reps);
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(mixSeed(2100 + rep));
        ParticleFilter pf(sys, particles, prior, rng);
        for (int t = 0; t <= steps; ++t) {
            pf.step(traj.measurements[t], rng);
            pfMeans[rep].push_back(pf.belief().mean);
        }
    }

    bool pass = true;
    double worstZ = 0.0;
    for (int t = 0; t <= steps; ++t) {
        for (int i = 0; i < 2; ++i) {
            double sum = 0.0;
            for (int rep = 0; rep < reps; ++rep) sum += pfMeans[rep][t][i];
            const double mean = sum / reps;
            double sq = 0.0;
            for (int rep = 0; rep < reps; ++rep) {
                const double d = pfMeans[rep][t][i] - mean;
                sq += d * d;
            }
            const double se = std::sqrt(sq / (reps - 1) / reps);
            const double z = std::abs(mean - kfMeans[t].mean[i]) / se;
            worstZ = std::max(worstZ, z);
            if (z > 3.0) pass = false;
        }
    }
    std::ostringstream detail;
    detail << reps << " repetitions, worst z-score " << worstZ;
    report(11, "Particle-filter mean stays within 3 standard errors of the KF", pass, detail.str());
}

// ---- 12. Covariance monotonicity of the proposed update ------------------

void criterion12() {
    MrSafeguardConfig cfg;
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> all = benchmarkPresets();
    all.push_back("gaussian");
    for (std::size_t p = 0; p < all.size(); ++p) {
        const std::string& name = all[p];
        LinearSystem sys = benchmarkSystem(name);
        for (int run = 0; run < 20 && pass; ++run) {
            Rng rng(mixSeed(3000 + 131 * p + run));
            GaussianBelief prior{Vector::Zero(2), Matrix::Identity(2, 2)};
            auto traj = simulate(sys, prior, 200, rng);
            GaussianBelief belief = prior;
            for (int t = 0; t <= 200; ++t) {
                const GaussianBelief pred = t == 0 ? belief : timeUpdate(belief, sys);
                belief = dpMeasurementUpdate(pred, sys, traj.measurements[t], cfg);
                if (!isPositiveDefinite(pred.cov - belief.cov + 1e-12 * Matrix::Identity(2, 2))) {
                    pass = false;
                    detail << name << " run " << run << " step " << t << " ";
                    break;
                }
            }
        }
    }
    report(12, "Measurement update never increases covariance (20 runs x 200 steps per preset)", pass,
           detail.str());
}

// ---- 13. Byte-identical CLI output --------------------------------------

std::string runCliToFile(const std::string& args, const std::string& outPath) {
    const std::string cmd =
        std::string(DPKF_CLI_PATH) + " " + args + " --out " + outPath + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) return "";
    std::ifstream in(outPath, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    std::remove(outPath.c_str());
    return ss.str();
}

void criterion13() {
    const std::string base = "run --noise bimodal_gm --estimators kf,dpkf,pf --runs 8 --steps 25 --seed 99 "
                             "--particles 200";
    const std::string a = runCliToFile(base + " --workers 1", "/tmp/dpkf_acc_a.csv");
    const std::string b = runCliToFile(base + " --workers 1", "/tmp/dpkf_acc_b.csv");
    const std::string c = runCliToFile(base + " --workers 4", "/tmp/dpkf_acc_c.csv");
    const bool pass = !a.empty() && a == b && a == c;
    report(13, "CLI results CSV is byte-identical across repeats and worker counts", pass,
           pass ? "" : "outputs differ or a run failed");
}

}  // namespace

int main() {
    std::cout << "acceptance suite\n";
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    std::cerr << "running the full benchmark sweep (minutes)..." << std::endl;
    const auto sweep = runSweep();
    criterion6(sweep);
    criterion7(sweep);
    criterion8(sweep);
    criterion9();
    criterion10();
    criterion11();
    criterion12();
    criterion13();
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures)) << std::endl;
    return failures == 0 ? 0 : 1;
}
