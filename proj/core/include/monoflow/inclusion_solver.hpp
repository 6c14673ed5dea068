#pragma once

#include <functional>

#include "monoflow/operator.hpp"

namespace monoflow {

struct InclusionOptions {
  double tol = 1e-10;       // relative to max(1, ||y - x||)
  int max_iters = 100;
  double damping = 0.5;     // step shrink factor when the residual does not decrease
  int max_backtracks = 40;
};

struct InclusionSolution {
  Vector y;            // lies in C exactly
  Vector u;            // G(y) + n with n in N_C(y) exactly
  double residual = 0; // ||y - P_C(x - lambda G(y))|| at the last linearization
  int iterations = 0;
};

using FieldFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

Vector project(const ConvexSet& set, const Vector& x);

// Semismooth Newton for y + lambda (G(y) + N_C(y)) ∋ x, written as the
// fixed-point equation y = P_C(x - lambda G(y)). Throws
// Error(kInnerNonconverged) with the final residual if max_iters is reached.
InclusionSolution solve_inclusion(const FieldFn& field, const JacobianFn& field_jacobian,
                                  const ConvexSet& set, double lambda, const Vector& x,
                                  const Vector& y0, const InclusionOptions& options = {});

}  // namespace monoflow
