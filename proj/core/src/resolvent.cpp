#include "monoflow/resolvent.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "monoflow/error.hpp"

namespace monoflow {

double solve_scalar_resolvent(const Polynomial& poly, double lambda, double target) {
  auto g = [&](double y) { return y + lambda * poly.value(y) - target; };
  auto dg = [&](double y) { return 1.0 + lambda * poly.derivative(y); };

  double lo = target, hi = target;
  double span = 1.0;
  for (int i = 0; g(lo) > 0.0; ++i) {
    if (i > 2000) throw Error(ErrorCode::kBracketOverflow, "scalar resolvent: lower bracket");
    lo = target - span;
    span *= 2.0;
  }
  span = 1.0;
  for (int i = 0; g(hi) < 0.0; ++i) {
    if (i > 2000) throw Error(ErrorCode::kBracketOverflow, "scalar resolvent: upper bracket");
    hi = target + span;
    span *= 2.0;
  }
  if (g(lo) == 0.0) return lo;
  if (g(hi) == 0.0) return hi;

  // Newton safeguarded by bisection on the bracket.
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double gy = g(y);
    if (gy == 0.0) return y;
    if (gy < 0.0) lo = y; else hi = y;
    const double slope = dg(y);
    double next = y - gy / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 4e-16 * std::max(1.0, std::abs(y))) return next;
    if (hi - lo <= 4e-16 * std::max(1.0, std::abs(y))) return next;
    y = next;
  }
  return y;
}

ResolventResult resolvent(const OperatorSpec& op, double lambda, const Vector& x,
                          const ResolventOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "resolvent index must be positive, got " + std::to_string(lambda));
  }
  if (x.size() != op.dim()) throw Error(ErrorCode::kDimensionMismatch, "resolvent: dimension mismatch");
  if (!x.allFinite()) throw Error(ErrorCode::kInvalidArgument, "resolvent: non-finite point");

  ResolventResult out;
  out.lambda = lambda;

  const bool pure_affine = op.affine() && !op.poly1d() && !op.norm_cubic();
  const bool pure_poly = op.poly1d() && !op.affine() && !op.norm_cubic();
  const bool box_or_free = std::holds_alternative<std::monostate>(op.domain()) ||
                           std::holds_alternative<Box>(op.domain());

  if (!op.has_single_valued()) {
    out.y = project(op.domain(), x);
  } else if (pure_affine && !op.has_normal_cone()) {
    const auto& a = *op.affine();
    const Matrix system = Matrix::Identity(op.dim(), op.dim()) + lambda * a.matrix;
    out.y = system.partialPivLu().solve(x - lambda * a.offset);
    out.membership_residual = ((x - out.y) / lambda - (a.matrix * out.y + a.offset)).norm();
  } else if (pure_poly && box_or_free) {
    out.y.resize(op.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      out.y[i] = solve_scalar_resolvent(*op.poly1d(), lambda, x[i]);
    }
    // Coordinatewise monotone: the box-constrained root is the clamped one.
    out.y = project(op.domain(), out.y);
    out.membership_residual = membership_violation(op, out.y, (x - out.y) / lambda);
  } else {
    const FieldFn field = [&op](const Vector& y) { return evaluate_single_valued(op, y); };
    const JacobianFn jac = [&op](const Vector& y) { return jacobian(op, y); };
    InclusionOptions inner;
    inner.tol = options.tol;
    inner.max_iters = options.max_iters;
    InclusionSolution sol = solve_inclusion(field, jac, op.domain(), lambda, x, x, inner);
    out.y = std::move(sol.y);
    out.iterations = sol.iterations;
    out.v = (x - out.y) / lambda;
    out.membership_residual = (out.v - sol.u).norm();
    return out;
  }
  out.v = (x - out.y) / lambda;
  return out;
}

}  // namespace monoflow
