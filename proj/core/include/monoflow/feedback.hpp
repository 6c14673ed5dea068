#pragma once

#include <optional>

#include "monoflow/operator.hpp"
#include "monoflow/resolvent.hpp"

namespace monoflow {

// Closed-loop law lambda * ||x - J_lambda x||^(p-1) = theta.
struct FeedbackParams {
  double theta = 0.5;
  int p = 2;
  // The discrete framework only needs theta > 0; the continuous analysis
  // needs theta in (0, 1).
  bool allow_large_theta = false;

  // Throws Error(kInvalidArgument) naming the violated invariant.
  void validate() const;

  bool operator==(const FeedbackParams&) const = default;
};

struct FeedbackOptions {
  double ae_tol = 1e-10;            // relative residual on the algebraic equation
  double stationarity_tol = 1e-12;  // res(x) at or below this is treated as a zero of A
  int max_doublings = 200;
  ResolventOptions resolvent;
};

// phi(lambda, x) = lambda^(1/(p-1)) ||x - J_lambda x||; phi(0, x) = 0.
double phi(const OperatorSpec& op, double lambda, const Vector& x, int p,
           const ResolventOptions& options = {});

struct LambdaSolution {
  double lambda = 0;
  ResolventResult resolvent;  // J_lambda x at the returned lambda
  int evaluations = 0;
};

// Lambda_theta(x). Brackets geometrically from `hint` (default 1) and then
// refines by Illinois-safeguarded bisection in log-log coordinates, where
// lambda -> lambda ||x - J_lambda x||^(p-1) is strictly increasing with slope
// between 1 and p. Throws Error(kStationary) when res(x) <= stationarity_tol.
LambdaSolution solve_lambda_detailed(const OperatorSpec& op, const Vector& x,
                                     const FeedbackParams& params,
                                     std::optional<double> hint = std::nullopt,
                                     const FeedbackOptions& options = {});

double solve_lambda(const OperatorSpec& op, const Vector& x, const FeedbackParams& params,
                    std::optional<double> hint = std::nullopt, const FeedbackOptions& options = {});

// Gamma_theta(x) = Lambda_theta(x)^(-1/(p-1)) off the zero set, 0 on it.
double gamma(const OperatorSpec& op, const Vector& x, const FeedbackParams& params,
             const FeedbackOptions& options = {});

}  // namespace monoflow
