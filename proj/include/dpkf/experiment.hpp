#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dpkf/estimator.hpp"

namespace dpkf {

struct ExperimentConfig {
    Matrix A, C;
    GaussianSpec processNoise;
    GaussianBelief initialBelief;
    std::string noiseName = "gaussian";
    std::map<std::string, double> noiseParams;
    std::vector<std::string> estimators = {"kf", "dpkf", "masreliez", "mckf", "pf"};
    int runs = 200;
    int steps = 200;
    std::uint64_t baseSeed = 42;
    EstimatorOptions options;
    int workers = 1;
    bool measureTime = false;

    /// The 2D rotation benchmark: A = rot(pi/18), C = [1 1],
    /// w ~ N(0, 0.05 I), initial belief N(0, I).
    static ExperimentConfig benchmark();
};

struct RunRecord {
    std::vector<double> sqErr;  // per-step squared estimation error
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
    bool diverged = false;
    int divergedAtStep = -1;
    int flags = 0;
};

struct CellStats {
    std::string estimator;
    std::string noise;
    int runsCompleted = 0;
    int divergedCount = 0;
    double rmseMean = std::numeric_limits<double>::quiet_NaN();
    double rmseStd = std::numeric_limits<double>::quiet_NaN();
    double timeGeomeanNorm = std::numeric_limits<double>::quiet_NaN();
    std::string status;  // "ok" | "na" | "diverged"
};

struct ExperimentResult {
    std::string noise;
    std::vector<CellStats> table;                    // requested estimator order
    std::map<std::string, std::vector<RunRecord>> runs;  // empty for "na" estimators
};

LinearSystem makeSystem(const ExperimentConfig& cfg);

/// Simulates steps+1 states and measurements (t = 0..steps), the initial
/// state drawn from the initial belief.
struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> measurements;
};
Trajectory simulate(const LinearSystem& sys, const GaussianBelief& initial, int steps, Rng& rng);

/// Runs the full Monte Carlo protocol. Deterministic given the config: run k
/// derives every stream from baseSeed ^ k, so results do not depend on the
/// worker count. Every estimator in a run sees the same trajectory.
ExperimentResult runMonteCarlo(const ExperimentConfig& cfg);

/// Per-step cross-run RMSE with a 95% normal-approximation CI of the mean
/// squared error, mapped through sqrt. Requires >= 2 completed runs.
struct TracePoint {
    double rmse, ciLow, ciHigh;
};
std::vector<TracePoint> rmseTraces(const std::vector<RunRecord>& runs);

}  // namespace dpkf
