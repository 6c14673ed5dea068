#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "monoflow_app/commands.hpp"

namespace {

constexpr const char* kFooter = R"(CSV columns (floats printed with 17 significant digits, empty = not applicable):
  FLOW                t, x0..x{d-1}, lambda, speed, gap_ergodic, residue_pointwise, dist, E
  HPE_EXACT / TENSOR  k, lambda, v_norm, eps, step_norm, gap_ergodic, residue_min_so_far, dist
A summary JSON is written next to the CSV with the extension .summary.json.

Environment:
  MONOFLOW_THREADS    cap on suites run in parallel by `check`

Exit codes: 0 ok, 1 runtime failure or failed check, 2 invalid config.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monoflow: closed-loop proximal flows and large-step HPE experiments"};
  app.footer(kFooter);
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string suite = "ALL";
  std::uint64_t seed = monoflow::app::kDefaultCheckSeed;

  auto* run = app.add_subcommand("run", "run an experiment and write its CSV trace and summary");
  run->add_option("--config", config, "experiment config (JSON)")->required();
  auto* run_seed = run->add_option("--seed", seed, "override the config seed");
  auto* run_out = run->add_option("--out", out, "override the CSV output path");

  auto* rates = app.add_subcommand("rates", "run an experiment and compare fitted rate slopes with theory");
  rates->add_option("--config", config, "experiment config (JSON)")->required();
  auto* rates_seed = rates->add_option("--seed", seed, "override the config seed");
  auto* rates_out = rates->add_option("--out", out, "override the CSV output path");

  auto* check = app.add_subcommand("check", "run the property suites");
  check->add_option("--suite", suite, "ALL, FEEDBACK, FLOW, HPE, TENSOR, METRICS or CORE");
  check->add_option("--seed", seed, "suite seed");

  CLI11_PARSE(app, argc, argv);

  monoflow::app::RunOverrides ov;
  if (*run_seed || *rates_seed) ov.seed = seed;
  if (*run_out || *rates_out) ov.out = out;

  if (*run) return monoflow::app::cmd_run(config, ov, std::cout, std::cerr);
  if (*rates) return monoflow::app::cmd_rates(config, ov, std::cout, std::cerr);
  return monoflow::app::cmd_check(suite, seed, std::cout, std::cerr);
}
