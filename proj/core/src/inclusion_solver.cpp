#include "monoflow/inclusion_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "monoflow/error.hpp"

namespace monoflow {

namespace {

// Element of the Clarke generalized Jacobian of P_C at w.
Matrix projection_jacobian(const ConvexSet& set, const Vector& w) {
  const auto d = w.size();
  if (const auto* box = std::get_if<Box>(&set)) {
    Matrix jac = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (w[i] > box->lower[i] && w[i] < box->upper[i]) jac(i, i) = 1.0;
    }
    return jac;
  }
  if (const auto* ball = std::get_if<Ball>(&set)) {
    const Vector offset = w - ball->center;
    const double rho = offset.norm();
    if (rho <= ball->radius) return Matrix::Identity(d, d);
    const Vector dir = offset / rho;
    return (ball->radius / rho) * (Matrix::Identity(d, d) - dir * dir.transpose());
  }
  return Matrix::Identity(d, d);
}

}  // namespace

Vector project(const ConvexSet& set, const Vector& x) {
  if (const auto* box = std::get_if<Box>(&set)) return x.cwiseMax(box->lower).cwiseMin(box->upper);
  if (const auto* ball = std::get_if<Ball>(&set)) {
    const Vector offset = x - ball->center;
    const double r = offset.norm();
    if (r <= ball->radius) return x;
    return ball->center + (ball->radius / r) * offset;
  }
  return x;
}

namespace {

InclusionSolution newton(const FieldFn& field, const JacobianFn& field_jacobian, const ConvexSet& set,
                         double lambda, const Vector& x, const Vector& y0, const InclusionOptions& options) {
  const auto d = x.size();
  const Matrix eye = Matrix::Identity(d, d);

  struct Eval {
    Vector g, w, p, r;
    double norm = 0;
  };
  auto eval = [&](const Vector& y) {
    Eval e;
    e.g = field(y);
    e.w = x - lambda * e.g;
    e.p = project(set, e.w);
    e.r = y - e.p;
    e.norm = e.r.norm();
    return e;
  };

  Vector y = project(set, y0);
  Eval cur = eval(y);
  const double floor = 1e-15 * std::max({1.0, x.norm(), y.norm()});
  // lambda G(y) is formed from terms of size |G(y)| + |DG(y)||y| that may cancel,
  // so its rounding grows with lambda and no residual below that is attainable
  double noise = 0;
  auto accept_level = [&] {
    return std::max(options.tol * std::max(1.0, (y - x).norm()), noise);
  };
  int iter = 0;
  int polish = 0;
  for (; iter < options.max_iters; ++iter) {
    const Matrix dg = field_jacobian(y);
    noise = 16 * std::numeric_limits<double>::epsilon() * lambda * (cur.g.norm() + dg.norm() * y.norm());
    const double loose = accept_level();
    if (cur.norm <= floor) break;
    if (cur.norm <= loose && polish >= 2) break;
    if (cur.norm <= loose) ++polish;

    const Matrix jac = eye + lambda * projection_jacobian(set, cur.w) * dg;
    const Vector step = jac.partialPivLu().solve(-cur.r);
    if (!step.allFinite()) break;

    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= options.max_backtracks; ++bt) {
      const Vector trial = y + t * step;
      Eval next = eval(trial);
      if (next.norm <= (1.0 - 1e-4 * t) * cur.norm) {
        y = trial;
        cur = std::move(next);
        accepted = true;
        break;
      }
      t *= options.damping;
    }
    if (!accepted) break;  // stagnated at rounding level or a genuine failure; judged below
  }

  noise = 16 * std::numeric_limits<double>::epsilon() * lambda *
          (cur.g.norm() + field_jacobian(y).norm() * y.norm());
  const double loose = accept_level();
  if (!(cur.norm <= loose)) {
    throw Error(ErrorCode::kInnerNonconverged,
                "semismooth Newton stopped after " + std::to_string(iter) +
                    " iterations with residual " + std::to_string(cur.norm));
  }

  // Finalize so that (w - P(w))/lambda is an exact normal-cone element at y.
  // Where the projection is inactive keep the Newton iterate: re-evaluating
  // P(x - lambda G(y)) there would amplify its rounding by lambda.
  InclusionSolution sol;
  if (const auto* box = std::get_if<Box>(&set)) {
    sol.y = y.cwiseMax(box->lower).cwiseMin(box->upper);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (cur.w[i] <= box->lower[i] || cur.w[i] >= box->upper[i]) sol.y[i] = cur.p[i];
    }
  } else if (const auto* ball = std::get_if<Ball>(&set)) {
    sol.y = (cur.w - ball->center).norm() > ball->radius ? cur.p : project(set, y);
  } else {
    sol.y = y;
  }
  sol.u = field(sol.y) + (cur.w - cur.p) / lambda;
  sol.residual = cur.norm;
  sol.iterations = iter;
  return sol;
}

}  // namespace

InclusionSolution solve_inclusion(const FieldFn& field, const JacobianFn& field_jacobian,
                                  const ConvexSet& set, double lambda, const Vector& x,
                                  const Vector& y0, const InclusionOptions& options) {
  try {
    return newton(field, field_jacobian, set, lambda, x, y0, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInnerNonconverged) throw;
  }
  // Continuation in lambda: small indices are easy (the fixed-point map
  // contracts), and each solution warm-starts the next, larger index.
  int iterations = 0;
  double current = lambda;
  std::optional<InclusionSolution> sol;
  for (int k = 0; k < 60 && !sol; ++k) {
    current *= 0.25;
    try {
      sol = newton(field, field_jacobian, set, current, x, y0, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInnerNonconverged) throw;
    }
  }
  if (!sol) throw Error(ErrorCode::kInnerNonconverged, "continuation found no solvable starting index");
  iterations += sol->iterations;
  double ratio = 4.0;
  while (current < lambda) {
    const double next = std::min(lambda, current * ratio);
    try {
      sol = newton(field, field_jacobian, set, next, x, sol->y, options);
      iterations += sol->iterations;
      current = next;
      ratio = std::min(ratio * ratio, 16.0);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInnerNonconverged) throw;
      ratio = std::sqrt(ratio);
      if (ratio < 1.0 + 1e-3) {
        throw Error(ErrorCode::kInnerNonconverged,
                    "continuation stalled at lambda = " + std::to_string(current) + " of " + std::to_string(lambda));
      }
    }
  }
  sol->iterations = iterations;
  return *sol;
}

}  // namespace monoflow
