#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monoflow/report.hpp"

namespace monoflow::app {

struct SuiteResult {
  std::string suite;
  std::vector<InvariantResult> items;
  std::string error;  // non-empty if the suite aborted

  bool passed() const;
};

// FEEDBACK, FLOW, HPE, TENSOR, METRICS, CORE.
const std::vector<std::string>& suite_names();

// Throws Error(kInvalidArgument) on an unknown name.
SuiteResult run_suite(const std::string& name, std::uint64_t seed);

// `which` is ALL or one suite name. Independent suites run on up to
// `threads` workers; results come back in suite_names() order.
std::vector<SuiteResult> run_suites(const std::string& which, std::uint64_t seed, int threads);

// MONOFLOW_THREADS if set and positive, else the hardware concurrency.
int thread_cap();

}  // namespace monoflow::app
