#include "dpkf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

namespace dpkf {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double sampleStd(const std::vector<double>& v, double m) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Geometric mean of per-block times, blocks of 10 consecutive completed
// runs; per-run times can sit below clock resolution.
double blockGeomean(const std::vector<double>& seconds) {
    if (seconds.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> blocks;
    double acc = 0.0;
    int count = 0;
    for (double s : seconds) {
        acc += s;
        if (++count == 10) {
            blocks.push_back(acc);
            acc = 0.0;
            count = 0;
        }
    }
    if (count > 0) blocks.push_back(acc * 10.0 / count);
    double logAcc = 0.0;
    for (double b : blocks) logAcc += std::log(std::max(b, 1e-12));
    return std::exp(logAcc / static_cast<double>(blocks.size()));
}

}  // namespace

ExperimentConfig ExperimentConfig::benchmark() {
    ExperimentConfig cfg;
    const double a = std::numbers::pi / 18.0;
    cfg.A.resize(2, 2);
    cfg.A << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    cfg.C.resize(1, 2);
    cfg.C << 1.0, 1.0;
    cfg.processNoise = {Vector::Zero(2), 0.05 * Matrix::Identity(2, 2)};
    cfg.initialBelief = {Vector::Zero(2), Matrix::Identity(2, 2)};
    return cfg;
}

LinearSystem makeSystem(const ExperimentConfig& cfg) {
    return {cfg.A, cfg.C, cfg.processNoise, makeDistribution(cfg.noiseName, cfg.noiseParams)};
}

Trajectory simulate(const LinearSystem& sys, const GaussianBelief& initial, int steps, Rng& rng) {
    const int n = sys.stateDim();
    const Eigen::LLT<Matrix> initChol = choleskyOrThrow(initial.cov, "simulate: initial covariance not PD");
    const Eigen::LLT<Matrix> procChol = choleskyOrThrow(sys.processNoise.cov, "simulate: process covariance not PD");
    Trajectory traj;
    traj.states.reserve(steps + 1);
    traj.measurements.reserve(steps + 1);

    Vector z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    Vector x = initial.mean + initChol.matrixL() * z;
    for (int t = 0; t <= steps; ++t) {
        if (t > 0) {
            for (int i = 0; i < n; ++i) z[i] = rng.normal();
            x = sys.A * x + sys.processNoise.mean + procChol.matrixL() * z;
        }
        traj.states.push_back(x);
        traj.measurements.push_back(sys.C * x + sys.measurementNoise->sample(rng));
    }
    return traj;
}

namespace {

RunRecord runOne(Estimator& est, const Trajectory& traj, const GaussianBelief& initial, Rng& estRng) {
    using Clock = std::chrono::steady_clock;
    RunRecord rec;
    const int total = static_cast<int>(traj.measurements.size());
    rec.sqErr.assign(total, std::numeric_limits<double>::quiet_NaN());
    est.initialize(initial, estRng);
    double seconds = 0.0;
    for (int t = 0; t < total; ++t) {
        try {
            const auto t0 = Clock::now();
            est.step(traj.measurements[t], estRng);
            seconds += std::chrono::duration<double>(Clock::now() - t0).count();
        } catch (const std::exception&) {
            rec.diverged = true;
            rec.divergedAtStep = t;
            break;
        }
        const Vector err = est.belief().mean - traj.states[t];
        if (!err.allFinite()) {
            rec.diverged = true;
            rec.divergedAtStep = t;
            break;
        }
        rec.sqErr[t] = err.squaredNorm();
    }
    rec.seconds = seconds;
    rec.flags = est.flagCount();
    if (!rec.diverged) {
        double acc = 0.0;
        for (double s : rec.sqErr) acc += s;
        rec.rmse = std::sqrt(acc / total);
    }
    return rec;
}

}  // namespace

ExperimentResult runMonteCarlo(const ExperimentConfig& cfg) {
    if (cfg.runs < 1 || cfg.steps < 1) throw std::invalid_argument("runs and steps must be >= 1");
    const LinearSystem sys = makeSystem(cfg);

    // Applicability screen; "na" cells never execute.
    std::vector<std::string> active;
    std::map<std::string, bool> applicable;
    for (const auto& name : cfg.estimators) {
        try {
            (void)makeEstimator(name, sys, cfg.options);
            applicable[name] = true;
            active.push_back(name);
        } catch (const NotApplicableError&) {
            applicable[name] = false;
        }
    }

    // The KF baseline anchors the divergence threshold even when not
    // requested.
    bool kfBaseline = std::find(active.begin(), active.end(), "kf") == active.end() &&
                      static_cast<bool>(momentMatched(*sys.measurementNoise));
    std::vector<std::string> executed = active;
    if (kfBaseline) executed.push_back("kf");

    std::map<std::string, std::vector<RunRecord>> records;
    for (const auto& name : executed) records[name].resize(cfg.runs);

    auto runIndex = [&](int k) {
        const std::uint64_t runKey = cfg.baseSeed ^ static_cast<std::uint64_t>(k);
        Rng trajRng(mixSeed(runKey));
        const Trajectory traj = simulate(sys, cfg.initialBelief, cfg.steps, trajRng);
        for (const auto& name : executed) {
            auto est = makeEstimator(name, sys, cfg.options);
            Rng estRng(mixSeed(runKey ^ fnv1a(name)));
            records[name][k] = runOne(*est, traj, cfg.initialBelief, estRng);
        }
    };

    const int workers = std::max(1, std::min(cfg.workers, cfg.runs));
    if (workers == 1) {
        for (int k = 0; k < cfg.runs; ++k) runIndex(k);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int k = w; k < cfg.runs; k += workers) runIndex(k);
            });
        for (auto& th : pool) th.join();
    }

    // Post-hoc divergence: runs whose RMSE explodes relative to the KF
    // baseline mean (100x), or past an absolute guard when no KF baseline
    // exists for this noise.
    double threshold = 1e3;
    if (records.count("kf")) {
        std::vector<double> kfRmse;
        for (const auto& rec : records.at("kf"))
            if (!rec.diverged) kfRmse.push_back(rec.rmse);
        if (!kfRmse.empty()) threshold = 100.0 * mean(kfRmse);
    }
    for (auto& [name, recs] : records)
        for (auto& rec : recs)
            if (!rec.diverged && rec.rmse > threshold) {
                rec.diverged = true;
                rec.rmse = std::numeric_limits<double>::quiet_NaN();
            }

    ExperimentResult result;
    result.noise = cfg.noiseName;

    // KF block-geomean time is the normalization unit.
    double kfTime = std::numeric_limits<double>::quiet_NaN();
    if (records.count("kf")) {
        std::vector<double> secs;
        for (const auto& rec : records.at("kf"))
            if (!rec.diverged) secs.push_back(rec.seconds);
        kfTime = blockGeomean(secs);
    }

    for (const auto& name : cfg.estimators) {
        CellStats cell;
        cell.estimator = name;
        cell.noise = cfg.noiseName;
        if (!applicable.at(name)) {
            cell.status = "na";
            result.table.push_back(cell);
            continue;
        }
        const auto& recs = records.at(name);
        std::vector<double> rmses, secs;
        for (const auto& rec : recs) {
            if (rec.diverged) {
                ++cell.divergedCount;
            } else {
                rmses.push_back(rec.rmse);
                secs.push_back(rec.seconds);
            }
        }
        cell.runsCompleted = static_cast<int>(rmses.size());
        if (rmses.empty()) {
            cell.status = "diverged";
        } else {
            cell.status = "ok";
            cell.rmseMean = mean(rmses);
            cell.rmseStd = sampleStd(rmses, cell.rmseMean);
            const double t = blockGeomean(secs);
            cell.timeGeomeanNorm = name == "kf" ? 1.0 : (std::isfinite(kfTime) ? t / kfTime : t);
        }
        result.table.push_back(cell);
        result.runs[name] = recs;
    }
    return result;
}

std::vector<TracePoint> rmseTraces(const std::vector<RunRecord>& runs) {
    std::vector<const RunRecord*> completed;
    for (const auto& r : runs)
        if (!r.diverged) completed.push_back(&r);
    if (completed.size() < 2) throw std::invalid_argument("rmse traces require at least 2 completed runs");
    const std::size_t steps = completed.front()->sqErr.size();
    std::vector<TracePoint> out(steps);
    const double n = static_cast<double>(completed.size());
    for (std::size_t t = 0; t < steps; ++t) {
        double m = 0.0;
        for (const auto* r : completed) m += r->sqErr[t];
        m /= n;
        double var = 0.0;
        for (const auto* r : completed) var += (r->sqErr[t] - m) * (r->sqErr[t] - m);
        var /= (n - 1.0);
        const double half = 1.959963984540054 * std::sqrt(var / n);
        out[t] = {std::sqrt(m), std::sqrt(std::max(0.0, m - half)), std::sqrt(m + half)};
    }
    return out;
}

}  // namespace dpkf
