#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "monoflow/feedback.hpp"
#include "monoflow/problems.hpp"
#include "monoflow/report.hpp"

namespace monoflow {

// Large-step hybrid proximal extragradient framework.
struct HpeConfig {
  double sigma = 0.0;      // relative-error tolerance, in [0, 1)
  double theta = 0.5;      // large-step constant, > 0
  int p = 1;
  int max_iters = 1000;
  double stop_res = 1e-9;  // STEP 1 stopping test res(x_k) <= stop_res
  double cert_tol = 1e-8;  // relative slack on both step inequalities
  // Witnesses for the sampled enlargement falsifier; 0 disables it.
  int enlargement_witnesses = 0;

  void validate() const;
  bool operator==(const HpeConfig&) const = default;
};

struct Certificate {
  bool relative_error_ok = false;
  bool large_step_ok = false;
  // sigma^2 ||y - x||^2 - (||lambda v + y - x||^2 + 2 lambda eps)
  double relative_error_slack = 0;
  // lambda ||y - x||^(p-1) - theta
  double large_step_slack = 0;
  // min <y - y~, v - v~> + eps over sampled graph points; NaN when not evaluated.
  double enlargement_margin = 0;

  bool ok() const { return relative_error_ok && large_step_ok; }
};

// What an oracle returns for STEP 2.
struct OracleStep {
  double lambda = 0;
  Vector y;
  Vector v;
  double eps = 0;
};

// Called with (x_k, k). The framework never picks lambda itself.
using Oracle = std::function<OracleStep(const Vector&, int)>;

struct IterateRecord {
  int k = 0;
  Vector x_prev;
  double lambda = 0;
  Vector y;
  Vector v;
  double eps = 0;
  Vector x_next;  // x_prev - lambda v
  Certificate cert;
};

enum class HpeStatus { kSolved, kMaxIters };

struct HpeRun {
  std::vector<IterateRecord> records;
  HpeStatus status = HpeStatus::kMaxIters;
};

Certificate verify_step(const HpeConfig& cfg, const Vector& x_prev, double lambda, const Vector& y,
                        const Vector& v, double eps);

// Exact resolvent step with lambda solving lambda ||J_lambda x - x||^(p-1) = theta.
OracleStep exact_oracle(const ProblemInstance& problem, const Vector& x, const HpeConfig& cfg,
                        std::optional<double> hint = std::nullopt);

// exact_oracle warm-started from the previous lambda.
Oracle make_exact_oracle(const ProblemInstance& problem, const HpeConfig& cfg);

// STEPs 0-4. Throws Error(kOracleFailed) or Error(kCertViolated) naming k.
HpeRun run(const ProblemInstance& problem, const Oracle& oracle, const HpeConfig& cfg, const Vector& x0);

// Lambda-weighted average of y_1..y_k.
Vector ergodic_iterate(const std::vector<IterateRecord>& records, std::size_t k);

// Discrete Lyapunov descent, step-sum and lambda-sum bounds, residual bound
// and error-bound contraction, evaluated with z = nearest known solution.
InvariantReport check_discrete_lemmas(const std::vector<IterateRecord>& records,
                                      const ProblemInstance& problem, const HpeConfig& cfg);

}  // namespace monoflow
