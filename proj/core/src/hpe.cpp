#include "monoflow/hpe.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "monoflow/enlargement.hpp"
#include "monoflow/error.hpp"
#include "monoflow/metrics.hpp"

namespace monoflow {

void HpeConfig::validate() const {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw Error(ErrorCode::kInvalidArgument, "hpe sigma must lie in [0, 1)");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw Error(ErrorCode::kInvalidArgument, "hpe theta must be > 0");
  if (p < 1) throw Error(ErrorCode::kInvalidArgument, "hpe order p must be >= 1");
  if (max_iters < 0) throw Error(ErrorCode::kInvalidArgument, "hpe max_iters must be >= 0");
  if (!(stop_res >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "hpe stop_res must be >= 0");
  if (!(cert_tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "hpe cert_tol must be >= 0");
}

Certificate verify_step(const HpeConfig& cfg, const Vector& x_prev, double lambda, const Vector& y,
                        const Vector& v, double eps) {
  Certificate cert;
  const double step_sq = (y - x_prev).squaredNorm();
  const double lhs = (lambda * v + y - x_prev).squaredNorm() + 2.0 * lambda * eps;
  const double rhs = cfg.sigma * cfg.sigma * step_sq;
  cert.relative_error_slack = rhs - lhs;
  cert.relative_error_ok = lhs <= rhs + cfg.cert_tol * step_sq;

  const double large = lambda * std::pow(std::sqrt(step_sq), cfg.p - 1);
  cert.large_step_slack = large - cfg.theta;
  cert.large_step_ok = large >= cfg.theta * (1.0 - cfg.cert_tol);
  cert.enlargement_margin = std::numeric_limits<double>::quiet_NaN();
  return cert;
}

OracleStep exact_oracle(const ProblemInstance& problem, const Vector& x, const HpeConfig& cfg,
                        std::optional<double> hint) {
  const FeedbackParams params{cfg.theta, cfg.p, true};
  LambdaSolution sol = solve_lambda_detailed(problem.op, x, params, hint);
  OracleStep step;
  step.lambda = sol.lambda;
  step.y = std::move(sol.resolvent.y);
  step.v = std::move(sol.resolvent.v);
  step.eps = 0.0;
  return step;
}

Oracle make_exact_oracle(const ProblemInstance& problem, const HpeConfig& cfg) {
  auto last = std::make_shared<std::optional<double>>();
  return [&problem, cfg, last](const Vector& x, int) {
    OracleStep step = exact_oracle(problem, x, cfg, *last);
    *last = step.lambda;
    return step;
  };
}

HpeRun run(const ProblemInstance& problem, const Oracle& oracle, const HpeConfig& cfg, const Vector& x0) {
  cfg.validate();
  if (x0.size() != problem.op.dim()) throw Error(ErrorCode::kDimensionMismatch, "hpe: x0 dimension mismatch");
  HpeRun out;
  Vector x = x0;
  if (min_norm_residual(problem.op, x) <= cfg.stop_res) {
    out.status = HpeStatus::kSolved;
    return out;
  }
  out.records.reserve(static_cast<std::size_t>(std::min(cfg.max_iters, 1 << 16)));
  for (int k = 0; k < cfg.max_iters; ++k) {
    OracleStep step;
    try {
      step = oracle(x, k);
    } catch (const Error& e) {
      throw Error(ErrorCode::kOracleFailed, "k = " + std::to_string(k) + ": " + e.what());
    }
    Certificate cert = verify_step(cfg, x, step.lambda, step.y, step.v, step.eps);
    if (!cert.ok()) {
      throw Error(ErrorCode::kCertViolated,
                  "k = " + std::to_string(k) + ": relative-error slack " + std::to_string(cert.relative_error_slack) +
                      ", large-step slack " + std::to_string(cert.large_step_slack));
    }
    if (cfg.enlargement_witnesses > 0) {
      const auto rep = eps_enlargement_check(problem.op, step.y, step.v, step.eps, cfg.enlargement_witnesses,
                                             static_cast<std::uint64_t>(k) + 1U);
      cert.enlargement_margin = rep.worst_margin;
    }

    IterateRecord rec;
    rec.k = k;
    rec.x_prev = x;
    rec.lambda = step.lambda;
    rec.x_next = x - step.lambda * step.v;
    rec.y = std::move(step.y);
    rec.v = std::move(step.v);
    rec.eps = step.eps;
    rec.cert = cert;
    x = rec.x_next;
    out.records.push_back(std::move(rec));

    if (min_norm_residual(problem.op, x) <= cfg.stop_res) {
      out.status = HpeStatus::kSolved;
      return out;
    }
  }
  out.status = HpeStatus::kMaxIters;
  return out;
}

Vector ergodic_iterate(const std::vector<IterateRecord>& records, std::size_t k) {
  if (k == 0 || records.empty()) throw Error(ErrorCode::kEmptyInput, "ergodic iterate needs at least one record");
  if (k > records.size()) throw Error(ErrorCode::kInvalidArgument, "ergodic iterate index exceeds record count");
  Vector num = Vector::Zero(records.front().y.size());
  double den = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    num += records[i].lambda * records[i].y;
    den += records[i].lambda;
  }
  return num / den;
}

InvariantReport check_discrete_lemmas(const std::vector<IterateRecord>& records, const ProblemInstance& problem,
                                      const HpeConfig& cfg) {
  if (!problem.solution_known()) {
    throw Error(ErrorCode::kUnknownSolution, "discrete lemma checks need a known solution set");
  }
  InvariantReport rep;
  if (records.empty()) return rep;

  const double sigma2 = cfg.sigma * cfg.sigma;
  const Vector& x0 = records.front().x_prev;
  const Vector z = nearest_solution(problem, x0);
  const double dist0 = (x0 - z).norm();
  const double e0 = lyapunov(x0, z);
  const double slack = 1e-9 * std::max(1.0, dist0 * dist0);

  InvariantResult certs{"step_certificates"};
  InvariantResult lyap{"lyapunov_nonincreasing"};
  InvariantResult descent{"caf_descent"};
  InvariantResult step_sum{"step_sum_bound"};
  InvariantResult lambda_sum{"lambda_sum_lower_bound"};
  InvariantResult residual_bound{"caf_error_residual"};
  InvariantResult eps_bound{"caf_error_eps"};

  double sum_sq = 0.0, sum_lambda = 0.0;
  double min_scaled_v = std::numeric_limits<double>::infinity();
  double min_eps = std::numeric_limits<double>::infinity();
  double e_prev = e0;
  bool all_exact = true;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const double k = static_cast<double>(i + 1);
    certs.observe(std::min(r.cert.relative_error_slack, r.cert.large_step_slack), r.cert.ok());

    const double ek = lyapunov(r.x_next, z);
    lyap.observe(e_prev + slack - ek, ek <= e_prev + slack);
    e_prev = ek;

    sum_sq += (r.x_prev - r.y).squaredNorm();
    sum_lambda += r.lambda;
    const double lhs = 0.5 * (1.0 - sigma2) * sum_sq;
    descent.observe(e0 - ek + slack - lhs, lhs <= e0 - ek + slack);

    const double cap = dist0 * dist0 / (1.0 - sigma2);
    step_sum.observe(cap + slack - sum_sq, sum_sq <= cap + slack);

    // Holder form of the bound, with the distance in the denominator.
    const double floor = cfg.theta * std::pow((1.0 - sigma2) / (dist0 * dist0), 0.5 * (cfg.p - 1)) *
                         std::pow(k, 0.5 * (cfg.p + 1));
    lambda_sum.observe((sum_lambda - floor) / floor, sum_lambda >= floor * (1.0 - 1e-9));

    min_scaled_v = std::min(min_scaled_v, std::sqrt(r.lambda) * r.v.norm());
    const double v_cap = std::sqrt((1.0 + cfg.sigma) / (1.0 - cfg.sigma)) * dist0 / std::sqrt(sum_lambda);
    residual_bound.observe(v_cap - min_scaled_v, min_scaled_v <= v_cap * (1.0 + 1e-9) + 1e-15);

    min_eps = std::min(min_eps, r.eps);
    const double eps_cap = sigma2 / (2.0 * (1.0 - sigma2)) * dist0 * dist0 / sum_lambda;
    eps_bound.observe(eps_cap - min_eps, min_eps <= eps_cap * (1.0 + 1e-9) + 1e-15);

    all_exact = all_exact && r.eps == 0.0;
  }
  rep.items = {certs, lyap, descent, step_sum, lambda_sum, residual_bound, eps_bound};

  if (all_exact && problem.error_bound) {
    InvariantResult contraction{"error_bound_decrease"};
    for (const auto& r : records) {
      const double d0 = dist_to_solutions(problem, r.x_prev);
      const double d1 = dist_to_solutions(problem, r.x_next);
      const double gain = d0 * d0 - d1 * d1;
      const double need = (1.0 - sigma2) * (r.x_prev - r.y).squaredNorm();
      const double tol = 1e-9 * std::max(d0 * d0, 1e-300) + 1e-15 * std::max(1.0, dist0 * dist0);
      contraction.observe(gain - need, gain >= need - tol);
    }
    rep.items.push_back(contraction);
  }
  return rep;
}

}  // namespace monoflow
