#include "monoflow/feedback.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "monoflow/error.hpp"

namespace monoflow {

void FeedbackParams::validate() const {
  if (p < 1) throw Error(ErrorCode::kInvalidArgument, "feedback order p must be >= 1");
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::kInvalidArgument, "feedback theta must be > 0");
  }
  if (!allow_large_theta && !(theta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "feedback theta must lie in (0, 1)");
  }
}

double phi(const OperatorSpec& op, double lambda, const Vector& x, int p, const ResolventOptions& options) {
  if (p < 2) throw Error(ErrorCode::kInvalidArgument, "phi is undefined for p = 1");
  if (lambda == 0.0) return 0.0;
  if (lambda < 0.0) throw Error(ErrorCode::kInvalidArgument, "phi needs lambda >= 0");
  const auto r = resolvent(op, lambda, x, options);
  return std::pow(lambda, 1.0 / (p - 1)) * (x - r.y).norm();
}

LambdaSolution solve_lambda_detailed(const OperatorSpec& op, const Vector& x, const FeedbackParams& params,
                                     std::optional<double> hint, const FeedbackOptions& options) {
  params.validate();
  const double theta = params.theta;
  const int p = params.p;

  if (min_norm_residual(op, x) <= options.stationarity_tol) {
    throw Error(ErrorCode::kStationary, "x is numerically a zero of A; Lambda_theta is undefined");
  }

  LambdaSolution out;
  if (p == 1) {
    out.lambda = theta;
    out.resolvent = resolvent(op, theta, x, options.resolvent);
    out.evaluations = 1;
    return out;
  }

  struct Sample {
    double lambda;
    double value;  // lambda ||x - J x||^(p-1)
    ResolventResult res;
  };
  auto sample = [&](double lambda) {
    ++out.evaluations;
    ResolventResult r = resolvent(op, lambda, x, options.resolvent);
    const double value = lambda * std::pow((x - r.y).norm(), p - 1);
    return Sample{lambda, value, std::move(r)};
  };
  auto accept = [&](Sample&& s) {
    out.lambda = s.lambda;
    out.resolvent = std::move(s.res);
    return out;
  };
  auto close_enough = [&](const Sample& s) { return std::abs(s.value - theta) <= options.ae_tol * theta; };

  const double start = hint.value_or(1.0);
  if (!(start > 0.0) || !std::isfinite(start)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda hint must be positive");
  }
  Sample first = sample(start);
  if (close_enough(first)) return accept(std::move(first));
  if (!(first.value > 0.0)) throw Error(ErrorCode::kStationary, "resolvent displacement vanished");

  // g(mu) >= (mu / lambda) g(lambda) for mu >= lambda, so lambda * theta / g(lambda)
  // lies on the far side of the root in exact arithmetic; expand geometrically
  // if rounding says otherwise.
  Sample lo = first, hi = first;
  Sample jump = sample(start * theta / first.value);
  if (close_enough(jump)) return accept(std::move(jump));
  if (first.value < theta) {
    hi = std::move(jump);
    for (int i = 0; hi.value < theta; ++i) {
      if (i >= options.max_doublings) throw Error(ErrorCode::kBracketOverflow, "no upper bracket for lambda");
      lo = std::move(hi);
      hi = sample(lo.lambda * 2.0);
    }
  } else {
    lo = std::move(jump);
    for (int i = 0; lo.value > theta; ++i) {
      if (i >= options.max_doublings) throw Error(ErrorCode::kBracketOverflow, "no lower bracket for lambda");
      hi = std::move(lo);
      lo = sample(hi.lambda * 0.5);
    }
  }
  if (!(lo.value > 0.0)) throw Error(ErrorCode::kStationary, "resolvent displacement vanished");

  // Illinois regula falsi on f(s) = log g(e^s) - log theta.
  const double log_theta = std::log(theta);
  double s_lo = std::log(lo.lambda), f_lo = std::log(lo.value) - log_theta;
  double s_hi = std::log(hi.lambda), f_hi = std::log(hi.value) - log_theta;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (close_enough(lo)) return accept(std::move(lo));
    if (close_enough(hi)) return accept(std::move(hi));
    double s = (s_lo * f_hi - s_hi * f_lo) / (f_hi - f_lo);
    if (!(s > s_lo && s < s_hi)) s = 0.5 * (s_lo + s_hi);
    if (s_hi - s_lo <= 1e-15 * std::max(1.0, std::abs(s))) {
      // Interval exhausted at rounding level; return the better endpoint.
      return accept(std::abs(f_lo) < std::abs(f_hi) ? std::move(lo) : std::move(hi));
    }
    Sample mid = sample(std::exp(s));
    const double f_mid = std::log(mid.value) - log_theta;
    if (close_enough(mid)) return accept(std::move(mid));
    if (f_mid < 0.0) {
      s_lo = s;
      f_lo = f_mid;
      lo = std::move(mid);
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      s_hi = s;
      f_hi = f_mid;
      hi = std::move(mid);
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  throw Error(ErrorCode::kInnerNonconverged, "lambda refinement did not converge");
}

double solve_lambda(const OperatorSpec& op, const Vector& x, const FeedbackParams& params,
                    std::optional<double> hint, const FeedbackOptions& options) {
  return solve_lambda_detailed(op, x, params, hint, options).lambda;
}

double gamma(const OperatorSpec& op, const Vector& x, const FeedbackParams& params, const FeedbackOptions& options) {
  if (params.p < 2) throw Error(ErrorCode::kInvalidArgument, "gamma needs p >= 2");
  if (min_norm_residual(op, x) <= options.stationarity_tol) return 0.0;
  const double lambda = solve_lambda(op, x, params, std::nullopt, options);
  return std::pow(1.0 / lambda, 1.0 / (params.p - 1));
}

}  // namespace monoflow
