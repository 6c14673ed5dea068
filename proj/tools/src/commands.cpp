#include "monoflow_app/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "monoflow/error.hpp"
#include "monoflow_app/config.hpp"
#include "monoflow_app/experiment.hpp"
#include "monoflow_app/suites.hpp"

namespace monoflow::app {

namespace {

// Loads, applies overrides and validates; nullopt after printing on failure.
std::optional<ExperimentConfig> prepare(const std::string& path, const RunOverrides& ov, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(path);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out) cfg.output = *ov.out;
    validate(cfg);
    return cfg;
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return std::nullopt;
  }
}

std::optional<ExperimentResult> execute(const ExperimentConfig& cfg, std::ostream& err) {
  try {
    return run_experiment(cfg);
  } catch (const Error& e) {
    err << "run failed: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
  }
  return std::nullopt;
}

bool write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res, std::ostream& err) {
  if (cfg.output.empty()) return true;
  const std::filesystem::path csv(cfg.output);
  std::ofstream out(csv, std::ios::binary);
  if (!out) {
    err << "cannot write '" << cfg.output << "'\n";
    return false;
  }
  write_csv(res.table, out);
  std::filesystem::path summary = csv;
  summary.replace_extension(".summary.json");
  std::ofstream js(summary, std::ios::binary);
  js << res.summary.dump(2) << '\n';
  return static_cast<bool>(out) && static_cast<bool>(js);
}

}  // namespace

int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out, std::ostream& err) {
  const auto cfg = prepare(config_path, overrides, err);
  if (!cfg) return 2;
  const auto res = execute(*cfg, err);
  if (!res) return 1;
  if (!write_outputs(*cfg, *res, err)) return 1;
  out << res->summary.dump(2) << '\n';
  return 0;
}

int cmd_rates(const std::string& config_path, const RunOverrides& overrides, std::ostream& out, std::ostream& err) {
  const auto cfg = prepare(config_path, overrides, err);
  if (!cfg) return 2;
  if (!make_problem(cfg->problem).solution_known()) {
    err << "config error: rates need a problem with a known solution set\n";
    return 2;
  }
  const auto res = execute(*cfg, err);
  if (!res) return 1;
  if (!write_outputs(*cfg, *res, err)) return 1;

  const int p = cfg->order();
  bool all = true;
  auto line = [&](const char* what, const nlohmann::json& fit, double exponent) {
    const double limit = exponent + 0.2;
    char buf[200];
    if (fit.is_null()) {
      std::snprintf(buf, sizeof buf, "SKIP %-8s not available for this problem", what);
    } else if (fit.contains("error")) {
      all = false;
      std::snprintf(buf, sizeof buf, "FAIL %-8s %s", what, fit["error"].get<std::string>().c_str());
    } else {
      const double slope = fit["slope"].get<double>();
      const bool ok = slope <= limit;
      all = all && ok;
      std::snprintf(buf, sizeof buf, "%s %-8s slope %.4f (theory %.2f, limit %.2f, R2 %.4f, %d points)",
                    ok ? "PASS" : "FAIL", what, slope, exponent, limit, fit["r_squared"].get<double>(),
                    fit["points"].get<int>());
    }
    out << buf << '\n';
  };
  line("gap", res->summary["fits"]["gap"], -0.5 * (p + 1));
  line("residue", res->summary["fits"]["residue"], -0.5 * p);
  return all ? 0 : 1;
}

int cmd_check(const std::string& suite, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  std::vector<SuiteResult> results;
  try {
    results = run_suites(suite, seed, thread_cap());
  } catch (const Error& e) {
    err << e.what() << '\n';
    return 2;
  }
  bool all = true;
  for (const auto& r : results) {
    if (!r.error.empty()) {
      out << "FAIL " << r.suite << " aborted: " << r.error << '\n';
      all = false;
    }
    for (const auto& item : r.items) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%s %s.%s worst_margin=%.3e n=%d", item.passed ? "PASS" : "FAIL",
                    r.suite.c_str(), item.name.c_str(), item.worst_margin, item.evaluated);
      out << buf;
      if (!item.note.empty()) out << " (" << item.note << ')';
      out << '\n';
      all = all && item.passed;
    }
  }
  out << (all ? "ALL PASSED" : "FAILURES PRESENT") << '\n';
  return all ? 0 : 1;
}

}  // namespace monoflow::app
