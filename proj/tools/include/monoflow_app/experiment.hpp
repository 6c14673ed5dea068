#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "monoflow/metrics.hpp"
#include "monoflow_app/config.hpp"

namespace monoflow::app {

// Non-applicable cells hold NaN and are written empty.
struct TraceTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
  TraceTable table;
  Series gap;      // (t or k, ergodic gap)
  Series residue;  // (t or k, pointwise residue; min-so-far for discrete runs)
  Series dist;     // (t or k, distance to the solution set)
  nlohmann::json summary;
};

Vector initial_point(const ExperimentConfig& cfg, const ProblemInstance& problem);

// Validates first (Error(kConfig)), then runs. Deterministic in (cfg, cfg.seed).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string format_double(double value);
void write_csv(const TraceTable& table, std::ostream& out);

}  // namespace monoflow::app
