#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace monoflow::app {

inline constexpr std::uint64_t kDefaultCheckSeed = 20240601;

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

// Exit codes: 0 success, 1 runtime failure (or failed check), 2 bad config.
int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out, std::ostream& err);
int cmd_check(const std::string& suite, std::uint64_t seed, std::ostream& out, std::ostream& err);
int cmd_rates(const std::string& config_path, const RunOverrides& overrides, std::ostream& out, std::ostream& err);

}  // namespace monoflow::app
