#pragma once

#include <cstdint>
#include <span>

#include "monoflow/inclusion_solver.hpp"
#include "monoflow/operator.hpp"

namespace monoflow {

struct ResolventOptions {
  double tol = 1e-10;
  int max_iters = 100;
};

// y = (I + lambda A)^{-1} x together with v = (x - y) / lambda.
struct ResolventResult {
  Vector y;
  Vector v;
  double lambda = 0;
  // ||v - u|| for an exact member u of A y; zero for closed-form cases.
  double membership_residual = 0;
  int iterations = 0;
};

// Exact or iterative resolvent, dispatched on the operator structure:
// projection for a pure normal cone, a linear solve for affine F on R^d,
// per-coordinate scalar root finding for poly1d (optionally clamped to a box)
// and semismooth Newton otherwise.
ResolventResult resolvent(const OperatorSpec& op, double lambda, const Vector& x,
                          const ResolventOptions& options = {});

// Root of y + lambda * poly(y) = target; strictly increasing in y.
double solve_scalar_resolvent(const Polynomial& poly, double lambda, double target);

}  // namespace monoflow
