#pragma once

#include <optional>

#include "monoflow/hpe.hpp"
#include "monoflow/problems.hpp"

namespace monoflow {

// Accelerated pth-order tensor method, run as an oracle inside the HPE framework.
struct TensorConfig {
  double sigma_hat = 0.1;  // inexactness of the surrogate solve
  double sigma_l = 0.1;    // window: sigma_l p!/L <= lambda ||y - x||^(p-1) <= sigma_u p!/L
  double sigma_u = 0.5;
  double lipschitz = 1.0;  // L; for affine F any positive value is valid
  int p = 2;
  int max_iters = 1000;
  double stop_res = 1e-9;
  int max_window_evals = 200;

  // Throws Error(kInvalidArgument) naming the violated constraint.
  void validate() const;
  double sigma() const { return sigma_hat + sigma_u; }
  double theta() const;
  double window_low() const;
  double window_high() const;
  // The framework parameters this oracle satisfies: sigma = sigma_hat + sigma_u,
  // theta = sigma_l p! / L.
  HpeConfig as_hpe() const;

  bool operator==(const TensorConfig&) const = default;
};

struct SurrogateStep {
  Vector y;
  Vector u;                 // element of (F_{x'} + H)(y)
  double inexactness = 0;   // ||lambda u + y - x||
  int iterations = 0;
};

// sigma_hat-inexact solution of y = (I + lambda (F_{x'} + H))^{-1} x with the
// Taylor model anchored at anchor_proj = P_dom(x). Exact linear or semismooth
// Newton solve for p <= 2; damped Newton with monotonicity checks for p >= 3
// (d <= 4 only). The sigma_hat bound is verified before returning.
SurrogateStep surrogate_resolvent(const ProblemInstance& problem, const Vector& anchor_proj, const Vector& x,
                                  double lambda, const TensorConfig& cfg);

struct WindowStep {
  double lambda = 0;
  Vector y;
  Vector u;
  int evaluations = 0;
};

// Finds lambda with lambda ||y_lambda - x||^(p-1) inside the window, aiming at
// its log-midpoint. Throws Error(kWindowUnreachable) with the last bracket.
WindowStep lambda_window_search(const ProblemInstance& problem, const Vector& x, const TensorConfig& cfg,
                                double hint);

// STEPs 1-3: project, search the window, then v = F(y) + u - F_{x'}(y).
OracleStep tensor_oracle(const ProblemInstance& problem, const Vector& x, const TensorConfig& cfg,
                         std::optional<double> hint = std::nullopt);

Oracle make_tensor_oracle(const ProblemInstance& problem, const TensorConfig& cfg);

}  // namespace monoflow
