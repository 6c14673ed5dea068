#include "monoflow/tensor.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <memory>
#include <string>

#include "monoflow/error.hpp"
#include "monoflow/inclusion_solver.hpp"

namespace monoflow {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double min_sym_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

void TensorConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (p < 1) fail("tensor order p must be >= 1");
  if (!(sigma_hat > 0.0 && sigma_hat < 1.0)) fail("sigma_hat must lie in (0, 1)");
  if (!(sigma_l > 0.0 && sigma_l < sigma_u && sigma_u < 1.0)) fail("need 0 < sigma_l < sigma_u < 1");
  if (!(sigma_l * std::pow(1.0 + sigma_hat, p - 1) < sigma_u * std::pow(1.0 - sigma_hat, p - 1))) {
    fail("need sigma_l (1 + sigma_hat)^(p-1) < sigma_u (1 - sigma_hat)^(p-1)");
  }
  if (!(sigma_hat + sigma_u < 1.0)) fail("need sigma = sigma_hat + sigma_u < 1");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) fail("tensor lipschitz L must be > 0");
  if (max_iters < 0) fail("tensor max_iters must be >= 0");
  if (!(stop_res >= 0.0)) fail("tensor stop_res must be >= 0");
  if (max_window_evals < 1) fail("max_window_evals must be >= 1");
}

double TensorConfig::theta() const { return sigma_l * factorial(p) / lipschitz; }
double TensorConfig::window_low() const { return sigma_l * factorial(p) / lipschitz; }
double TensorConfig::window_high() const { return sigma_u * factorial(p) / lipschitz; }

HpeConfig TensorConfig::as_hpe() const {
  HpeConfig h;
  h.sigma = sigma();
  h.theta = theta();
  h.p = p;
  h.max_iters = max_iters;
  h.stop_res = stop_res;
  return h;
}

SurrogateStep surrogate_resolvent(const ProblemInstance& problem, const Vector& anchor_proj, const Vector& x,
                                  double lambda, const TensorConfig& cfg) {
  const auto& op = problem.op;
  const auto d = op.dim();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::kInvalidArgument, "surrogate: lambda must be positive");
  if (x.size() != d || anchor_proj.size() != d) throw Error(ErrorCode::kDimensionMismatch, "surrogate: dimension mismatch");

  const int p = cfg.p;
  SurrogateStep out;
  if (p <= 2) {
    // The model is affine: u -> M_s u + q_s.
    const Matrix m_s = p == 2 ? jacobian(op, anchor_proj) : Matrix::Zero(d, d);
    const Vector q_s = evaluate_single_valued(op, anchor_proj) - m_s * anchor_proj;
    if (!op.has_normal_cone()) {
      const Matrix system = Matrix::Identity(d, d) + lambda * m_s;
      out.y = system.partialPivLu().solve(x - lambda * q_s);
      out.u = m_s * out.y + q_s;
    } else {
      const FieldFn field = [&](const Vector& y) -> Vector { return m_s * y + q_s; };
      const JacobianFn jac = [&](const Vector&) -> Matrix { return m_s; };
      InclusionSolution sol = solve_inclusion(field, jac, op.domain(), lambda, x, x);
      out.y = std::move(sol.y);
      out.u = std::move(sol.u);
      out.iterations = sol.iterations;
    }
  } else {
    if (d > 4) {
      throw Error(ErrorCode::kSurrogateNonmonotone, "p >= 3 surrogate solves are limited to d <= 4");
    }
    if (min_sym_eigenvalue(jacobian(op, anchor_proj)) < -1e-10) {
      throw Error(ErrorCode::kSurrogateNonmonotone, "DF is not monotone at the anchor");
    }
    const FieldFn field = [&](const Vector& y) { return taylor_surrogate(op, anchor_proj, p, y); };
    const JacobianFn jac = [&](const Vector& y) { return taylor_surrogate_jacobian(op, anchor_proj, p, y); };
    InclusionSolution sol = solve_inclusion(field, jac, op.domain(), lambda, x, anchor_proj);
    // The root must sit on a locally monotone branch of I + lambda F_{x'}.
    const Matrix local = Matrix::Identity(d, d) + lambda * jac(sol.y);
    if (!(min_sym_eigenvalue(local) > 0.0)) {
      throw Error(ErrorCode::kSurrogateNonmonotone, "surrogate inclusion solved on a non-monotone branch");
    }
    out.y = std::move(sol.y);
    out.u = std::move(sol.u);
    out.iterations = sol.iterations;
  }
  out.inexactness = (lambda * out.u + out.y - x).norm();
  const double allowed = cfg.sigma_hat * (out.y - x).norm();
  if (!(out.inexactness <= allowed)) {
    throw Error(ErrorCode::kInnerNonconverged, "surrogate solve misses the sigma_hat bound: " +
                                                   std::to_string(out.inexactness) + " > " + std::to_string(allowed));
  }
  return out;
}

WindowStep lambda_window_search(const ProblemInstance& problem, const Vector& x, const TensorConfig& cfg,
                                double hint) {
  cfg.validate();
  if (!(hint > 0.0) || !std::isfinite(hint)) throw Error(ErrorCode::kInvalidArgument, "window search hint must be > 0");
  const Vector anchor = project_domain(problem.op, x);
  const double low = cfg.window_low(), high = cfg.window_high();
  const double target = std::sqrt(low * high);
  const int p = cfg.p;

  WindowStep out;
  // A failed surrogate solve (no root on the monotone branch) is read as
  // "lambda too large": value = +inf, so it can only serve as an upper end.
  struct Sample {
    double lambda;
    double value;  // lambda ||y - x||^(p-1)
    std::optional<SurrogateStep> step;
  };
  auto budget = [&] {
    if (out.evaluations >= cfg.max_window_evals) {
      throw Error(ErrorCode::kWindowUnreachable, "window not reached after " + std::to_string(out.evaluations) +
                                                     " surrogate solves");
    }
  };
  auto sample = [&](double lambda) {
    budget();
    ++out.evaluations;
    try {
      SurrogateStep s = surrogate_resolvent(problem, anchor, x, lambda, cfg);
      const double value = lambda * std::pow((s.y - x).norm(), p - 1);
      return Sample{lambda, value, std::move(s)};
    } catch (const Error& e) {
      if (p < 3 || (e.code() != ErrorCode::kInnerNonconverged && e.code() != ErrorCode::kSurrogateNonmonotone)) throw;
      return Sample{lambda, std::numeric_limits<double>::infinity(), std::nullopt};
    }
  };
  auto inside = [&](const Sample& s) { return s.step && s.value >= low && s.value <= high; };
  auto accept = [&](Sample&& s) {
    out.lambda = s.lambda;
    out.y = std::move(s.step->y);
    out.u = std::move(s.step->u);
    return out;
  };

  if (p == 1) {
    Sample s = sample(target);
    return accept(std::move(s));
  }

  Sample first = sample(hint);
  while (!first.step) first = sample(first.lambda * 0.5);
  if (inside(first)) return accept(std::move(first));
  if (!(first.value > 0.0)) throw Error(ErrorCode::kStationary, "surrogate step vanished");

  Sample lo = first, hi = first;
  Sample jump = sample(first.lambda * target / first.value);
  if (inside(jump)) return accept(std::move(jump));
  if (first.value < low) {
    hi = std::move(jump);
    while (hi.value < low) {
      lo = std::move(hi);
      hi = sample(lo.lambda * 2.0);
      if (inside(hi)) return accept(std::move(hi));
    }
  } else {
    lo = std::move(jump);
    while (lo.value > high) {
      hi = std::move(lo);
      lo = sample(hi.lambda * 0.5);
      if (inside(lo)) return accept(std::move(lo));
    }
  }
  if (!(lo.value > 0.0)) throw Error(ErrorCode::kStationary, "surrogate step vanished");

  // Illinois refinement in log-log coordinates toward the window midpoint;
  // plain bisection while the upper end is a failed solve.
  const double log_target = std::log(target);
  double s_lo = std::log(lo.lambda), f_lo = std::log(lo.value) - log_target;
  double s_hi = std::log(hi.lambda), f_hi = std::log(hi.value) - log_target;
  int side = 0;
  while (true) {
    double s = std::isfinite(f_hi) ? (s_lo * f_hi - s_hi * f_lo) / (f_hi - f_lo) : 0.5 * (s_lo + s_hi);
    if (!(s > s_lo && s < s_hi)) s = 0.5 * (s_lo + s_hi);
    Sample mid = sample(std::exp(s));
    if (inside(mid)) return accept(std::move(mid));
    const double f_mid = std::log(mid.value) - log_target;
    if (f_mid < 0.0) {
      s_lo = s;
      f_lo = f_mid;
      if (side == -1 && std::isfinite(f_hi)) f_hi *= 0.5;
      side = -1;
    } else {
      s_hi = s;
      f_hi = f_mid;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    if (s_hi - s_lo <= 1e-15 * std::max(1.0, std::abs(s))) {
      throw Error(ErrorCode::kWindowUnreachable, "bracket [" + std::to_string(std::exp(s_lo)) + ", " +
                                                     std::to_string(std::exp(s_hi)) + "] collapsed outside the window");
    }
  }
}

OracleStep tensor_oracle(const ProblemInstance& problem, const Vector& x, const TensorConfig& cfg,
                         std::optional<double> hint) {
  const Vector anchor = project_domain(problem.op, x);
  WindowStep w = lambda_window_search(problem, x, cfg, hint.value_or(1.0));
  OracleStep step;
  step.lambda = w.lambda;
  step.v = evaluate_single_valued(problem.op, w.y) + w.u - taylor_surrogate(problem.op, anchor, cfg.p, w.y);
  step.y = std::move(w.y);
  step.eps = 0.0;
  return step;
}

Oracle make_tensor_oracle(const ProblemInstance& problem, const TensorConfig& cfg) {
  cfg.validate();
  auto last = std::make_shared<std::optional<double>>();
  return [&problem, cfg, last](const Vector& x, int) {
    OracleStep step = tensor_oracle(problem, x, cfg, *last);
    *last = step.lambda;
    return step;
  };
}

}  // namespace monoflow
