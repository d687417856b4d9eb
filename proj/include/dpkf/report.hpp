#pragma once

#include <string>
#include <vector>

#include "dpkf/experiment.hpp"

namespace dpkf {

/// Results CSV, schema:
///   estimator,noise,runs_completed,diverged_count,rmse_mean,rmse_std,time_geomean_norm,status
/// Floats carry 17 significant digits; undefined fields are left empty.
/// Timing values are emitted only when includeTiming is set (wall-clock
/// values are not reproducible across invocations); the column itself is
/// always part of the schema.
std::string resultsCsv(const std::vector<CellStats>& cells, bool includeTiming);

/// Same content as JSON (always includes timing when present).
std::string resultsJson(const std::vector<CellStats>& cells, bool includeTiming);

/// Traces CSV: step, then <name>_rmse_mean,<name>_ci_low,<name>_ci_high per
/// estimator.
std::string tracesCsv(const std::vector<std::string>& names,
                      const std::vector<std::vector<TracePoint>>& traces);

/// Human-readable summary table for the terminal.
std::string humanTable(const std::vector<CellStats>& cells, bool includeTiming);

}  // namespace dpkf
