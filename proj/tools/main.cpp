// Command-line front end: Monte Carlo benchmark runs, the full benchmark
// grid, RMSE trace emission, and preset listing.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "dpkf/report.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitAllDiverged = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

dpkf::Matrix parseMatrix(const json& j, const std::string& key) {
    const auto& rows = j.at(key);
    dpkf::Matrix m(rows.size(), rows.at(0).size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c].get<double>();
    return m;
}

dpkf::Vector parseVector(const json& j, const std::string& key) {
    const auto& vals = j.at(key);
    dpkf::Vector v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i].get<double>();
    return v;
}

void applyConfigFile(dpkf::ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    try {
        if (j.contains("A")) cfg.A = parseMatrix(j, "A");
        if (j.contains("C")) cfg.C = parseMatrix(j, "C");
        if (j.contains("process_noise_mean")) cfg.processNoise.mean = parseVector(j, "process_noise_mean");
        if (j.contains("process_noise_cov")) cfg.processNoise.cov = parseMatrix(j, "process_noise_cov");
        if (j.contains("initial_mean") || j.contains("initial_cov")) {
            dpkf::Vector mu = j.contains("initial_mean") ? parseVector(j, "initial_mean") : cfg.initialBelief.mean;
            dpkf::Matrix p = j.contains("initial_cov") ? parseMatrix(j, "initial_cov") : cfg.initialBelief.cov;
            cfg.initialBelief = dpkf::GaussianBelief(mu, p);
        }
        if (j.contains("noise")) cfg.noiseName = j["noise"].get<std::string>();
        if (j.contains("noise_params"))
            for (const auto& [k, v] : j["noise_params"].items()) cfg.noiseParams[k] = v.get<double>();
        if (j.contains("estimators")) cfg.estimators = j["estimators"].get<std::vector<std::string>>();
        if (j.contains("runs")) cfg.runs = j["runs"].get<int>();
        if (j.contains("steps")) cfg.steps = j["steps"].get<int>();
        if (j.contains("seed")) cfg.baseSeed = j["seed"].get<std::uint64_t>();
        if (j.contains("particles")) cfg.options.particleCount = j["particles"].get<int>();
        if (j.contains("kernel_sigma")) cfg.options.mckf.kernelSigma = j["kernel_sigma"].get<double>();
        if (j.contains("grid_points")) cfg.options.quadrature.points = j["grid_points"].get<int>();
        if (j.contains("grid_sigmas")) cfg.options.quadrature.sigmas = j["grid_sigmas"].get<double>();
        if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
    } catch (const json::exception& e) {
        throw ConfigError("bad config value in " + path + ": " + e.what());
    }
}

std::vector<std::string> splitCsvList(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void writeFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

std::uint64_t defaultSeed() {
    if (const char* env = std::getenv("BF_SEED")) return std::strtoull(env, nullptr, 10);
    return 42;
}

// Validates names early so error messages list the valid options.
void validateConfig(const dpkf::ExperimentConfig& cfg) {
    (void)dpkf::makeDistribution(cfg.noiseName, cfg.noiseParams);
    const auto& known = dpkf::estimatorNames();
    for (const auto& e : cfg.estimators)
        if (std::find(known.begin(), known.end(), e) == known.end()) {
            std::string msg = "unknown estimator '" + e + "'; valid names:";
            for (const auto& n : known) msg += " " + n;
            throw ConfigError(msg);
        }
    if (cfg.estimators.empty()) throw ConfigError("estimator list is empty");
}

int emitResults(const dpkf::ExperimentResult& result, const std::string& outPath, const std::string& format,
                bool includeTiming) {
    const std::string body = format == "json" ? dpkf::resultsJson(result.table, includeTiming)
                                              : dpkf::resultsCsv(result.table, includeTiming);
    writeFile(outPath, body);
    std::cout << dpkf::humanTable(result.table, includeTiming);
    std::cout << "results written to " << outPath << "\n";
    bool anyOk = false, anyDiverged = false;
    for (const auto& c : result.table) {
        if (c.status == "ok") anyOk = true;
        if (c.status == "diverged") anyDiverged = true;
    }
    return (!anyOk && anyDiverged) ? kExitAllDiverged : kExitOk;
}

struct CommonFlags {
    std::string configPath, noise, estimators, out = "results.csv", format = "csv", tracesOut;
    int runs = -1, steps = -1, particles = -1, gridPoints = -1, workers = -1;
    double kernelSigma = -1.0, gridSigmas = -1.0;
    std::optional<std::uint64_t> seed;
    bool time = false;

    void attach(CLI::App* cmd, bool withNoise = true) {
        cmd->add_option("--config", configPath, "JSON config file");
        if (withNoise) cmd->add_option("--noise", noise, "noise preset name");
        cmd->add_option("--estimators", estimators, "comma-separated estimator names");
        cmd->add_option("--runs", runs, "Monte Carlo runs");
        cmd->add_option("--steps", steps, "timesteps per run");
        cmd->add_option("--seed", seed, "base seed");
        cmd->add_option("--particles", particles, "particle count for pf");
        cmd->add_option("--kernel-sigma", kernelSigma, "mckf kernel size");
        cmd->add_option("--grid-points", gridPoints, "masreliez grid points");
        cmd->add_option("--grid-sigmas", gridSigmas, "masreliez grid half-width in sd");
        cmd->add_option("--out", out, "output file path");
        cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--workers", workers, "parallel run workers");
        cmd->add_flag("--time", time, "measure and emit normalized runtimes");
        cmd->add_option("--traces-out", tracesOut, "also write per-step RMSE traces CSV");
    }

    dpkf::ExperimentConfig build() const {
        dpkf::ExperimentConfig cfg = dpkf::ExperimentConfig::benchmark();
        cfg.baseSeed = defaultSeed();
        if (!configPath.empty()) applyConfigFile(cfg, configPath);
        if (!noise.empty()) cfg.noiseName = noise;
        if (!estimators.empty()) cfg.estimators = splitCsvList(estimators);
        if (runs >= 0) cfg.runs = runs;
        if (steps >= 0) cfg.steps = steps;
        if (seed) cfg.baseSeed = *seed;
        if (particles >= 0) cfg.options.particleCount = particles;
        if (kernelSigma >= 0.0) cfg.options.mckf.kernelSigma = kernelSigma;
        if (gridPoints >= 0) cfg.options.quadrature.points = gridPoints;
        if (gridSigmas >= 0.0) cfg.options.quadrature.sigmas = gridSigmas;
        if (workers >= 0) cfg.workers = workers;
        cfg.measureTime = time;
        validateConfig(cfg);
        return cfg;
    }
};

void writeTraces(const dpkf::ExperimentResult& result, const std::vector<std::string>& estimators,
                 const std::string& path) {
    std::vector<std::string> names;
    std::vector<std::vector<dpkf::TracePoint>> traces;
    for (const auto& name : estimators) {
        auto it = result.runs.find(name);
        if (it == result.runs.end()) continue;
        names.push_back(name);
        traces.push_back(dpkf::rmseTraces(it->second));
    }
    if (names.empty()) throw ConfigError("no completed estimator available for traces");
    writeFile(path, dpkf::tracesCsv(names, traces));
}

int cmdRun(const CommonFlags& flags) {
    dpkf::ExperimentConfig cfg = flags.build();
    const dpkf::ExperimentResult result = dpkf::runMonteCarlo(cfg);
    if (!flags.tracesOut.empty()) writeTraces(result, cfg.estimators, flags.tracesOut);
    return emitResults(result, flags.out, flags.format, cfg.measureTime);
}

int cmdBenchmark(const CommonFlags& flags) {
    static const std::vector<std::string> grid = {"skew_normal", "bimodal_gm", "gamma", "impulsive_gm",
                                                  "cauchy", "beta_prime", "exponential", "levy"};
    std::vector<dpkf::CellStats> cells;
    bool anyOk = false;
    for (const auto& noise : grid) {
        CommonFlags cell = flags;
        cell.noise = noise;
        cell.time = true;
        dpkf::ExperimentConfig cfg = cell.build();
        std::cerr << "running " << noise << " (" << cfg.runs << " runs x " << cfg.steps << " steps)...\n";
        const dpkf::ExperimentResult result = dpkf::runMonteCarlo(cfg);
        for (const auto& c : result.table) {
            cells.push_back(c);
            if (c.status == "ok") anyOk = true;
        }
    }
    const std::string body =
        flags.format == "json" ? dpkf::resultsJson(cells, true) : dpkf::resultsCsv(cells, true);
    writeFile(flags.out, body);
    std::cout << dpkf::humanTable(cells, true);
    std::cout << "results written to " << flags.out << "\n";
    return anyOk ? kExitOk : kExitAllDiverged;
}

int cmdTrace(const CommonFlags& flags) {
    dpkf::ExperimentConfig cfg = flags.build();
    if (cfg.runs < 2) throw ConfigError("trace requires --runs >= 2");
    const dpkf::ExperimentResult result = dpkf::runMonteCarlo(cfg);
    writeTraces(result, cfg.estimators, flags.out.empty() ? "traces.csv" : flags.out);
    std::cout << "traces written to " << (flags.out.empty() ? "traces.csv" : flags.out) << "\n";
    return kExitOk;
}

int cmdList() {
    std::cout << "noise presets:\n";
    for (const auto& name : dpkf::presetNames()) std::cout << "  " << dpkf::presetSummary(name) << "\n";
    std::cout << "estimators:\n";
    for (const auto& name : dpkf::estimatorNames()) std::cout << "  " << name << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recursive state estimation benchmark for linear systems with non-Gaussian measurement noise"};
    app.require_subcommand(1);

    CommonFlags runFlags, benchFlags, traceFlags;
    auto* run = app.add_subcommand("run", "run one Monte Carlo experiment");
    runFlags.attach(run);
    auto* bench = app.add_subcommand("benchmark", "run the full noise-preset x estimator grid");
    benchFlags.attach(bench, /*withNoise=*/false);
    benchFlags.out = "benchmark.csv";
    auto* trace = app.add_subcommand("trace", "emit per-step RMSE traces");
    traceFlags.attach(trace);
    traceFlags.out = "traces.csv";
    auto* list = app.add_subcommand("list", "list noise presets and estimators");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmdRun(runFlags);
        if (bench->parsed()) return cmdBenchmark(benchFlags);
        if (trace->parsed()) return cmdTrace(traceFlags);
        if (list->parsed()) return cmdList();
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
