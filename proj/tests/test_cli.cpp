#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef DPKF_CLI_PATH
#error "DPKF_CLI_PATH must point at the CLI binary"
#endif

namespace {

struct CommandResult {
    int exitCode;
    std::string output;  // stdout + stderr
};

CommandResult runCli(const std::string& args) {
    const std::string outPath = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                                "/dpkf_cli_out_" + std::to_string(::getpid()) + ".txt";
    const std::string cmd = std::string(DPKF_CLI_PATH) + " " + args + " > " + outPath + " 2>&1";
    const int raw = std::system(cmd.c_str());
    std::ifstream in(outPath);
    std::stringstream ss;
    ss << in.rdbuf();
    std::remove(outPath.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmpPath(const std::string& leaf) {
    return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + leaf;
}

}  // namespace

TEST_CASE("cli list") {
    auto res = runCli("list");
    CHECK(res.exitCode == 0);
    for (const char* name : {"skew_normal", "bimodal_gm", "gamma", "impulsive_gm", "cauchy", "beta_prime",
                             "exponential", "levy", "gaussian"})
        CHECK(res.output.find(name) != std::string::npos);
    for (const char* name : {"kf", "dpkf", "masreliez", "mckf", "pf"})
        CHECK(res.output.find(name) != std::string::npos);
    // Levy preset parameters.
    CHECK(res.output.find("levy") != std::string::npos);
    CHECK(res.output.find("3") != std::string::npos);
}

TEST_CASE("cli run writes the results csv") {
    const std::string out = tmpPath("dpkf_run.csv");
    auto res = runCli("run --noise impulsive_gm --estimators kf,dpkf --runs 4 --steps 15 --seed 7 --out " + out);
    CAPTURE(res.output);
    CHECK(res.exitCode == 0);
    const std::string csv = readFile(out);
    CHECK(csv.find("estimator,noise,runs_completed,diverged_count,rmse_mean,rmse_std,time_geomean_norm,status") ==
          0);
    CHECK(csv.find("kf,impulsive_gm,4,0,") != std::string::npos);
    CHECK(csv.find("dpkf,impulsive_gm,4,0,") != std::string::npos);
    std::remove(out.c_str());
}

TEST_CASE("cli run marks kf na under cauchy noise") {
    const std::string out = tmpPath("dpkf_cauchy.csv");
    auto res = runCli("run --noise cauchy --estimators kf,dpkf --runs 3 --steps 10 --out " + out);
    CAPTURE(res.output);
    CHECK(res.exitCode == 0);
    const std::string csv = readFile(out);
    CHECK(csv.find("kf,cauchy,0,0,,,,na") != std::string::npos);
    CHECK(csv.find("dpkf,cauchy,3,0,") != std::string::npos);
    std::remove(out.c_str());
}

TEST_CASE("cli errors") {
    SUBCASE("missing config file names the path") {
        auto res = runCli("run --config /nonexistent/cfg.json");
        CHECK(res.exitCode != 0);
        CHECK(res.output.find("error:") != std::string::npos);
        CHECK(res.output.find("/nonexistent/cfg.json") != std::string::npos);
    }

    SUBCASE("unknown estimator lists the valid names") {
        auto res = runCli("run --estimators bogus --runs 2 --steps 5");
        CHECK(res.exitCode == 2);
        CHECK(res.output.find("error:") != std::string::npos);
        for (const char* name : {"kf", "dpkf", "masreliez", "mckf", "pf"})
            CHECK(res.output.find(name) != std::string::npos);
    }

    SUBCASE("unknown noise preset") {
        auto res = runCli("run --noise triangular --runs 2 --steps 5");
        CHECK(res.exitCode == 2);
        CHECK(res.output.find("error:") != std::string::npos);
    }

    SUBCASE("trace needs at least two runs") {
        auto res = runCli("trace --noise gamma --estimators dpkf --runs 1 --steps 5");
        CHECK(res.exitCode == 2);
        CHECK(res.output.find("error:") != std::string::npos);
    }
}

TEST_CASE("cli output is byte-identical across worker counts and repeats") {
    const std::string outA = tmpPath("dpkf_w1.csv"), outB = tmpPath("dpkf_w3.csv"), outC = tmpPath("dpkf_rep.csv");
    const std::string base = "run --noise bimodal_gm --estimators kf,dpkf,pf --runs 5 --steps 20 --seed 11 "
                             "--particles 150 ";
    CHECK(runCli(base + "--workers 1 --out " + outA).exitCode == 0);
    CHECK(runCli(base + "--workers 3 --out " + outB).exitCode == 0);
    CHECK(runCli(base + "--workers 1 --out " + outC).exitCode == 0);
    const std::string a = readFile(outA);
    CHECK(a == readFile(outB));
    CHECK(a == readFile(outC));
    std::remove(outA.c_str());
    std::remove(outB.c_str());
    std::remove(outC.c_str());
}

TEST_CASE("cli config file with flag overrides") {
    const std::string cfgPath = tmpPath("dpkf_cfg.json");
    {
        std::ofstream cfg(cfgPath);
        cfg << R"({"noise": "gamma", "estimators": ["dpkf"], "runs": 3, "steps": 8, "seed": 5})";
    }
    const std::string out = tmpPath("dpkf_cfg_out.csv");
    auto res = runCli("run --config " + cfgPath + " --runs 2 --out " + out);
    CAPTURE(res.output);
    CHECK(res.exitCode == 0);
    const std::string csv = readFile(out);
    CHECK(csv.find("dpkf,gamma,2,0,") != std::string::npos);  // --runs beats the file
    std::remove(cfgPath.c_str());
    std::remove(out.c_str());
}

TEST_CASE("cli json format") {
    const std::string out = tmpPath("dpkf_run.json");
    auto res = runCli("run --noise exponential --estimators dpkf --runs 2 --steps 8 --format json --out " + out);
    CHECK(res.exitCode == 0);
    const std::string js = readFile(out);
    CHECK(js.find("\"estimator\"") != std::string::npos);
    CHECK(js.find("\"exponential\"") != std::string::npos);
    std::remove(out.c_str());
}

TEST_CASE("cli trace emits per-step columns") {
    const std::string out = tmpPath("dpkf_traces.csv");
    auto res = runCli("trace --noise impulsive_gm --estimators kf,dpkf --runs 3 --steps 12 --out " + out);
    CAPTURE(res.output);
    CHECK(res.exitCode == 0);
    const std::string csv = readFile(out);
    CHECK(csv.find("step,kf_rmse_mean,kf_ci_low,kf_ci_high,dpkf_rmse_mean,dpkf_ci_low,dpkf_ci_high") == 0);
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 14);  // header + 13 steps (t = 0..12)
    std::remove(out.c_str());
}
