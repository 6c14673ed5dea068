#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace monoflow {

// One checked inequality. margin = (allowed side) - (observed side), so a
// negative worst_margin means the inequality failed somewhere.
struct InvariantResult {
  explicit InvariantResult(std::string n = {}) : name(std::move(n)) {}

  std::string name;
  bool passed = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  int evaluated = 0;
  std::string note;

  void observe(double margin, bool ok) {
    worst_margin = std::min(worst_margin, margin);
    passed = passed && ok;
    ++evaluated;
  }
};

struct InvariantReport {
  std::vector<InvariantResult> items;

  bool all_passed() const {
    return std::all_of(items.begin(), items.end(), [](const InvariantResult& r) { return r.passed; });
  }
  const InvariantResult* find(const std::string& name) const {
    for (const auto& r : items) {
      if (r.name == name) return &r;
    }
    return nullptr;
  }
};

}  // namespace monoflow
