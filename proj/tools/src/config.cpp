#include "monoflow_app/config.hpp"

#include <fstream>

#include "monoflow/error.hpp"

namespace monoflow::app {

using nlohmann::json;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kFlow: return "FLOW";
    case Mode::kHpeExact: return "HPE_EXACT";
    case Mode::kTensor: return "TENSOR";
  }
  return "FLOW";
}

Mode mode_from_string(const std::string& name) {
  if (name == "FLOW") return Mode::kFlow;
  if (name == "HPE_EXACT") return Mode::kHpeExact;
  if (name == "TENSOR") return Mode::kTensor;
  throw Error(ErrorCode::kConfig, "unknown mode '" + name + "' (expected FLOW, HPE_EXACT or TENSOR)");
}

int ExperimentConfig::order() const {
  switch (mode) {
    case Mode::kFlow: return flow.p;
    case Mode::kHpeExact: return hpe.p;
    case Mode::kTensor: return tensor.p;
  }
  return 1;
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) throw Error(ErrorCode::kConfig, "config must be a JSON object");
    const json& prob = j.at("problem");
    read(prob, "name", cfg.problem.name);
    read(prob, "d", cfg.problem.d);
    read(prob, "scale", cfg.problem.scale);
    read(prob, "mu", cfg.problem.mu);
    read(prob, "skew_scale", cfg.problem.skew_scale);
    read(prob, "seed", cfg.problem.seed);

    cfg.mode = mode_from_string(j.at("mode").get<std::string>());
    const json params = j.value("params", json::object());
    switch (cfg.mode) {
      case Mode::kFlow:
        read(params, "theta", cfg.flow.theta);
        read(params, "p", cfg.flow.p);
        read(params, "allow_large_theta", cfg.flow.allow_large_theta);
        read(j, "horizon", cfg.horizon);
        break;
      case Mode::kHpeExact:
        read(params, "sigma", cfg.hpe.sigma);
        read(params, "theta", cfg.hpe.theta);
        read(params, "p", cfg.hpe.p);
        read(params, "stop_res", cfg.hpe.stop_res);
        read(params, "cert_tol", cfg.hpe.cert_tol);
        read(j, "horizon", cfg.hpe.max_iters);
        break;
      case Mode::kTensor:
        read(params, "sigma_hat", cfg.tensor.sigma_hat);
        read(params, "sigma_l", cfg.tensor.sigma_l);
        read(params, "sigma_u", cfg.tensor.sigma_u);
        read(params, "L", cfg.tensor.lipschitz);
        read(params, "p", cfg.tensor.p);
        read(params, "stop_res", cfg.tensor.stop_res);
        read(j, "horizon", cfg.tensor.max_iters);
        break;
    }
    read(j, "step", cfg.step);
    read(j, "sample_stride", cfg.sample_stride);
    if (j.contains("x0") && !j.at("x0").is_null()) cfg.x0 = j.at("x0").get<std::vector<double>>();
    read(j, "output", cfg.output);
    read(j, "seed", cfg.seed);
    read(j, "tail_fraction", cfg.tail_fraction);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = {{"name", cfg.problem.name},   {"d", cfg.problem.d},
                  {"scale", cfg.problem.scale}, {"mu", cfg.problem.mu},
                  {"skew_scale", cfg.problem.skew_scale}, {"seed", cfg.problem.seed}};
  j["mode"] = to_string(cfg.mode);
  switch (cfg.mode) {
    case Mode::kFlow:
      j["params"] = {{"theta", cfg.flow.theta}, {"p", cfg.flow.p}, {"allow_large_theta", cfg.flow.allow_large_theta}};
      j["horizon"] = cfg.horizon;
      break;
    case Mode::kHpeExact:
      j["params"] = {{"sigma", cfg.hpe.sigma},       {"theta", cfg.hpe.theta},
                     {"p", cfg.hpe.p},               {"stop_res", cfg.hpe.stop_res},
                     {"cert_tol", cfg.hpe.cert_tol}};
      j["horizon"] = cfg.hpe.max_iters;
      break;
    case Mode::kTensor:
      j["params"] = {{"sigma_hat", cfg.tensor.sigma_hat}, {"sigma_l", cfg.tensor.sigma_l},
                     {"sigma_u", cfg.tensor.sigma_u},     {"L", cfg.tensor.lipschitz},
                     {"p", cfg.tensor.p},                 {"stop_res", cfg.tensor.stop_res}};
      j["horizon"] = cfg.tensor.max_iters;
      break;
  }
  j["step"] = cfg.step;
  j["sample_stride"] = cfg.sample_stride;
  j["x0"] = cfg.x0 ? json(*cfg.x0) : json(nullptr);
  j["output"] = cfg.output;
  j["seed"] = cfg.seed;
  j["tail_fraction"] = cfg.tail_fraction;
  return j;
}

void validate(const ExperimentConfig& cfg) {
  try {
    const ProblemInstance problem = make_problem(cfg.problem);
    switch (cfg.mode) {
      case Mode::kFlow:
        cfg.flow.validate();
        if (!(cfg.horizon >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "horizon T must be >= 0");
        if (!(cfg.step > 0.0 && cfg.step <= 0.1)) throw Error(ErrorCode::kInvalidArgument, "step h must lie in (0, 0.1]");
        if (cfg.sample_stride < 1) throw Error(ErrorCode::kInvalidArgument, "sample_stride must be >= 1");
        break;
      case Mode::kHpeExact:
        cfg.hpe.validate();
        break;
      case Mode::kTensor:
        cfg.tensor.validate();
        break;
    }
    if (cfg.x0 && static_cast<int>(cfg.x0->size()) != problem.op.dim()) {
      throw Error(ErrorCode::kInvalidArgument, "x0 has the wrong dimension");
    }
    if (!(cfg.tail_fraction > 0.0 && cfg.tail_fraction <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "tail_fraction must lie in (0, 1]");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, e.what());
  }
}

}  // namespace monoflow::app
