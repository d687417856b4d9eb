#include "dpkf/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace dpkf {

namespace {

std::string fmt17(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string resultsCsv(const std::vector<CellStats>& cells, bool includeTiming) {
    std::ostringstream oss;
    oss << "estimator,noise,runs_completed,diverged_count,rmse_mean,rmse_std,time_geomean_norm,status\n";
    for (const auto& c : cells) {
        oss << c.estimator << ',' << c.noise << ',' << c.runsCompleted << ',' << c.divergedCount << ','
            << fmt17(c.rmseMean) << ',' << fmt17(c.rmseStd) << ','
            << (includeTiming ? fmt17(c.timeGeomeanNorm) : std::string()) << ',' << c.status << '\n';
    }
    return oss.str();
}

std::string resultsJson(const std::vector<CellStats>& cells, bool includeTiming) {
    std::ostringstream oss;
    oss << "[\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        oss << "  {\"estimator\": \"" << c.estimator << "\", \"noise\": \"" << c.noise
            << "\", \"runs_completed\": " << c.runsCompleted << ", \"diverged_count\": " << c.divergedCount
            << ", \"rmse_mean\": " << (std::isfinite(c.rmseMean) ? fmt17(c.rmseMean) : "null")
            << ", \"rmse_std\": " << (std::isfinite(c.rmseStd) ? fmt17(c.rmseStd) : "null")
            << ", \"time_geomean_norm\": "
            << (includeTiming && std::isfinite(c.timeGeomeanNorm) ? fmt17(c.timeGeomeanNorm) : "null")
            << ", \"status\": \"" << c.status << "\"}" << (i + 1 < cells.size() ? "," : "") << "\n";
    }
    oss << "]\n";
    return oss.str();
}

std::string tracesCsv(const std::vector<std::string>& names,
                      const std::vector<std::vector<TracePoint>>& traces) {
    std::ostringstream oss;
    oss << "step";
    for (const auto& n : names) oss << ',' << n << "_rmse_mean," << n << "_ci_low," << n << "_ci_high";
    oss << '\n';
    std::size_t steps = 0;
    for (const auto& t : traces) steps = std::max(steps, t.size());
    for (std::size_t s = 0; s < steps; ++s) {
        oss << s;
        for (const auto& t : traces) {
            if (s < t.size())
                oss << ',' << fmt17(t[s].rmse) << ',' << fmt17(t[s].ciLow) << ',' << fmt17(t[s].ciHigh);
            else
                oss << ",,,";
        }
        oss << '\n';
    }
    return oss.str();
}

std::string humanTable(const std::vector<CellStats>& cells, bool includeTiming) {
    std::ostringstream oss;
    oss << std::left << std::setw(11) << "estimator" << std::setw(14) << "noise" << std::right
        << std::setw(6) << "runs" << std::setw(6) << "div" << std::setw(10) << "rmse" << std::setw(10) << "sd";
    if (includeTiming) oss << std::setw(9) << "time";
    oss << "  status\n";
    for (const auto& c : cells) {
        oss << std::left << std::setw(11) << c.estimator << std::setw(14) << c.noise << std::right
            << std::setw(6) << c.runsCompleted << std::setw(6) << c.divergedCount;
        auto num = [&](double v, int w) {
            std::ostringstream cell;
            if (std::isfinite(v)) cell << std::fixed << std::setprecision(3) << v;
            else cell << "-";
            oss << std::setw(w) << cell.str();
        };
        num(c.rmseMean, 10);
        num(c.rmseStd, 10);
        if (includeTiming) num(c.timeGeomeanNorm, 9);
        oss << "  " << c.status << '\n';
    }
    return oss.str();
}

}  // namespace dpkf
