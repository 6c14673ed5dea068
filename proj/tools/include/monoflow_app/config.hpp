#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "monoflow/feedback.hpp"
#include "monoflow/hpe.hpp"
#include "monoflow/problems.hpp"
#include "monoflow/tensor.hpp"

namespace monoflow::app {

enum class Mode { kFlow, kHpeExact, kTensor };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct ExperimentConfig {
  ProblemSpec problem;
  Mode mode = Mode::kFlow;
  FeedbackParams flow;   // FLOW
  HpeConfig hpe;         // HPE_EXACT
  TensorConfig tensor;   // TENSOR
  double horizon = 10.0; // T for FLOW; iteration caps live in hpe/tensor
  double step = 0.01;    // h, FLOW only
  int sample_stride = 1; // FLOW only
  std::optional<std::vector<double>> x0;
  std::string output;
  std::uint64_t seed = 1;
  double tail_fraction = 0.5;

  int order() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Throws Error(kConfig) on malformed input or a violated parameter invariant.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Checks every invariant of the selected mode; throws Error(kConfig) naming it.
void validate(const ExperimentConfig& cfg);

}  // namespace monoflow::app
