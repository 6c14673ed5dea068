#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "monoflow/error.hpp"
#include "monoflow_app/commands.hpp"
#include "monoflow_app/config.hpp"
#include "monoflow_app/experiment.hpp"

using namespace monoflow;
using namespace monoflow::app;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path dir = fs::path(MONOFLOW_TEST_TMP) / ::testing::UnitTest::GetInstance()->current_test_info()->name();
  fs::create_directories(dir);
  return dir;
}

fs::path write_json(const fs::path& dir, const std::string& name, const nlohmann::json& j) {
  const fs::path path = dir / name;
  std::ofstream(path) << j.dump(2);
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json flow_config() {
  return {{"problem", {{"name", "bilinear_saddle"}, {"d", 2}}},
          {"mode", "FLOW"},
          {"params", {{"theta", 0.3}, {"p", 2}}},
          {"horizon", 1.0},
          {"step", 0.01},
          {"seed", 3}};
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cmd(const fs::path& cfg, RunOverrides ov = {}) {
  std::ostringstream out, err;
  const int code = cmd_run(cfg.string(), ov, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Run, ZeroHorizonSingleRow) {
  const auto dir = tmp_dir();
  auto j = flow_config();
  j["horizon"] = 0.0;
  j["output"] = (dir / "t0.csv").string();
  const auto r = run_cmd(write_json(dir, "t0.json", j));
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "t0.csv");
  std::string header, line;
  std::getline(in, header);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 1);
  EXPECT_EQ(header, "t,x0,x1,lambda,speed,gap_ergodic,residue_pointwise,dist,E");
  EXPECT_TRUE(fs::exists(dir / "t0.summary.json"));
}

TEST(Run, SigmaAtLeastOneIsConfigError) {
  const auto dir = tmp_dir();
  nlohmann::json j = {{"problem", {{"name", "bilinear_saddle"}, {"d", 2}}},
                      {"mode", "HPE_EXACT"},
                      {"params", {{"sigma", 1.0}, {"theta", 0.1}, {"p", 1}}},
                      {"horizon", 10}};
  const auto r = run_cmd(write_json(dir, "bad.json", j));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sigma"), std::string::npos) << r.err;
}

TEST(Run, TensorStepZeroViolationIsConfigError) {
  const auto dir = tmp_dir();
  nlohmann::json j = {{"problem", {{"name", "cubic_1d"}}},
                      {"mode", "TENSOR"},
                      {"params", {{"sigma_hat", 0.3}, {"sigma_l", 0.4}, {"sigma_u", 0.45}, {"L", 6.0}, {"p", 3}}},
                      {"horizon", 10}};
  const auto r = run_cmd(write_json(dir, "bad.json", j));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sigma_l (1 + sigma_hat)^(p-1)"), std::string::npos) << r.err;
}

TEST(Run, MalformedInputsAreConfigErrors) {
  const auto dir = tmp_dir();
  std::ofstream(dir / "broken.json") << "{ \"mode\": ";
  EXPECT_EQ(run_cmd(dir / "broken.json").code, 2);
  EXPECT_EQ(run_cmd(dir / "missing.json").code, 2);

  auto j = flow_config();
  j["problem"]["name"] = "nope";
  EXPECT_EQ(run_cmd(write_json(dir, "name.json", j)).code, 2);
  j = flow_config();
  j["mode"] = "WALK";
  EXPECT_EQ(run_cmd(write_json(dir, "mode.json", j)).code, 2);
  j = flow_config();
  j["params"]["theta"] = 1.5;
  EXPECT_EQ(run_cmd(write_json(dir, "theta.json", j)).code, 2);
  j = flow_config();
  j["x0"] = {0.1, 0.2, 0.3};
  EXPECT_EQ(run_cmd(write_json(dir, "x0.json", j)).code, 2);
}

TEST(Run, UnwritableOutputIsRuntimeError) {
  const auto dir = tmp_dir();
  RunOverrides ov;
  ov.out = (dir / "no_such_dir" / "trace.csv").string();
  EXPECT_EQ(run_cmd(write_json(dir, "ok.json", flow_config()), ov).code, 1);
}

TEST(Run, CsvIsBitIdenticalAcrossRuns) {
  const auto dir = tmp_dir();
  for (const char* name : {"flow_bilinear_p2.json", "hpe_bilinear_p2.json", "tensor_cubic_p3.json"}) {
    const fs::path cfg = fs::path(MONOFLOW_CONFIG_DIR) / name;
    RunOverrides a, b;
    a.out = (dir / "a.csv").string();
    b.out = (dir / "b.csv").string();
    ASSERT_EQ(run_cmd(cfg, a).code, 0) << name;
    ASSERT_EQ(run_cmd(cfg, b).code, 0) << name;
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv")) << name;
    EXPECT_EQ(slurp(dir / "a.summary.json"), slurp(dir / "b.summary.json")) << name;
  }
}

TEST(Run, SeedChangesRandomStart) {
  const auto dir = tmp_dir();
  const auto cfg = write_json(dir, "flow.json", flow_config());
  RunOverrides a, b;
  a.out = (dir / "a.csv").string();
  b.out = (dir / "b.csv").string();
  b.seed = 99;
  ASSERT_EQ(run_cmd(cfg, a).code, 0);
  ASSERT_EQ(run_cmd(cfg, b).code, 0);
  EXPECT_NE(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}

TEST(Csv, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  TraceTable t{{"a", "b"}, {{1.0 / 3.0, std::numeric_limits<double>::quiet_NaN()}}};
  std::ostringstream out;
  write_csv(t, out);
  EXPECT_EQ(out.str(), "a,b\n0.33333333333333331,\n");
  EXPECT_EQ(std::stod("0.33333333333333331"), 1.0 / 3.0);
}

TEST(Config, RoundTripShippedConfigs) {
  for (const auto& entry : fs::directory_iterator(MONOFLOW_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const auto cfg = load_config(entry.path().string());
    const auto again = parse_config(to_json(cfg));
    EXPECT_EQ(cfg, again) << entry.path();
    EXPECT_EQ(to_json(again), to_json(cfg)) << entry.path();
  }
}

TEST(Config, RoundTripRandomConfigs) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::uniform_int_distribution<int> order(1, 4);
  for (int i = 0; i < 300; ++i) {
    ExperimentConfig cfg;
    cfg.mode = static_cast<Mode>(i % 3);
    cfg.problem.name = "strongly_monotone_affine";
    cfg.problem.d = 1 + i % 5;
    cfg.problem.mu = u(rng) * 3;
    cfg.problem.skew_scale = u(rng);
    cfg.problem.seed = rng();
    cfg.seed = rng();
    cfg.tail_fraction = u(rng);
    cfg.output = "out_" + std::to_string(i) + ".csv";
    if (i % 2) cfg.x0 = std::vector<double>(cfg.problem.d, u(rng) - 0.5);
    switch (cfg.mode) {
      case Mode::kFlow:
        cfg.flow = FeedbackParams{u(rng), order(rng)};
        cfg.horizon = 100 * u(rng);
        cfg.step = u(rng) / 10;
        cfg.sample_stride = 1 + i % 7;
        break;
      case Mode::kHpeExact:
        cfg.hpe.sigma = u(rng);
        cfg.hpe.theta = u(rng);
        cfg.hpe.p = order(rng);
        cfg.hpe.max_iters = 1 + i;
        cfg.hpe.stop_res = u(rng) * 1e-9;
        cfg.hpe.cert_tol = u(rng) * 1e-8;
        break;
      case Mode::kTensor:
        cfg.tensor.sigma_hat = 0.1;
        cfg.tensor.sigma_l = 0.05 * u(rng);
        cfg.tensor.sigma_u = 0.5;
        cfg.tensor.lipschitz = 10 * u(rng);
        cfg.tensor.p = order(rng);
        cfg.tensor.max_iters = 1 + i;
        cfg.tensor.stop_res = u(rng) * 1e-9;
        break;
    }
    ASSERT_NO_THROW(validate(cfg)) << to_json(cfg).dump();
    const auto text = to_json(cfg).dump();
    EXPECT_EQ(parse_config(nlohmann::json::parse(text)), cfg) << text;
  }
}

TEST(Check, FeedbackSuiteReportsSandwich) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_check("FEEDBACK", kDefaultCheckSeed, out, err), 0) << out.str() << err.str();
  EXPECT_NE(out.str().find("PASS FEEDBACK.phi_sandwich"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("n=100"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("ALL PASSED"), std::string::npos);
}

TEST(Check, FlowSuiteHasIdentityOracle) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_check("FLOW", kDefaultCheckSeed, out, err), 0) << out.str() << err.str();
  EXPECT_NE(out.str().find("FLOW.identity_closed_form"), std::string::npos) << out.str();
}

TEST(Check, UnknownSuite) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_check("NOPE", kDefaultCheckSeed, out, err), 2);
}

TEST(Check, OutputIsDeterministic) {
  std::ostringstream a, b, err;
  cmd_check("METRICS", 5, a, err);
  cmd_check("METRICS", 5, b, err);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Rates, BilinearOrderOnePasses) {
  const auto dir = tmp_dir();
  RunOverrides ov;
  ov.out = (dir / "r.csv").string();
  std::ostringstream out, err;
  const fs::path cfg = fs::path(MONOFLOW_CONFIG_DIR) / "hpe_bilinear_p1.json";
  EXPECT_EQ(cmd_rates(cfg.string(), ov, out, err), 0) << out.str() << err.str();
  EXPECT_NE(out.str().find("PASS gap"), std::string::npos);
  EXPECT_NE(out.str().find("PASS residue"), std::string::npos);
}

TEST(Rates, TensorOrderTwoPasses) {
  const auto dir = tmp_dir();
  RunOverrides ov;
  ov.out = (dir / "r.csv").string();
  std::ostringstream out, err;
  const fs::path cfg = fs::path(MONOFLOW_CONFIG_DIR) / "tensor_bilinear_p2.json";
  EXPECT_EQ(cmd_rates(cfg.string(), ov, out, err), 0) << out.str() << err.str();
}
