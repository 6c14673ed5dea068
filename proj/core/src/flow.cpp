#include "monoflow/flow.hpp"

#include <cmath>
#include <string>

#include "monoflow/error.hpp"
#include "monoflow/metrics.hpp"

namespace monoflow {

FieldValue vector_field_detailed(const OperatorSpec& op, const Vector& x, const FeedbackParams& params,
                                 std::optional<double> hint, const FeedbackOptions& options) {
  LambdaSolution sol = solve_lambda_detailed(op, x, params, hint, options);
  FieldValue out;
  out.lambda = sol.lambda;
  out.y = std::move(sol.resolvent.y);
  out.field = out.y - x;
  return out;
}

Vector vector_field(const OperatorSpec& op, const Vector& x, const FeedbackParams& params) {
  return vector_field_detailed(op, x, params).field;
}

namespace {

double ae_residual(const FieldValue& f, const FeedbackParams& params) {
  const double value = f.lambda * std::pow(f.field.norm(), params.p - 1);
  return std::abs(value - params.theta) / params.theta;
}

}  // namespace

Trajectory integrate(const ProblemInstance& problem, const Vector& x0, const FeedbackParams& params,
                     double horizon, double step, const FlowOptions& options) {
  params.validate();
  const auto& op = problem.op;
  if (x0.size() != op.dim()) throw Error(ErrorCode::kDimensionMismatch, "integrate: x0 dimension mismatch");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 0");
  if (!(step > 0.0 && step <= 0.1)) throw Error(ErrorCode::kInvalidArgument, "step h must lie in (0, 0.1]");
  if (options.sample_stride < 1) throw Error(ErrorCode::kInvalidArgument, "sample_stride must be >= 1");

  Trajectory traj;
  FieldValue cur = vector_field_detailed(op, x0, params, std::nullopt, options.feedback);
  Vector x = x0;
  double t = 0.0;
  traj.max_ae_residual = ae_residual(cur, params);
  traj.ergodic_num = Vector::Zero(op.dim());
  traj.samples.push_back(FlowState{0.0, x, cur.lambda, cur.y, cur.y});

  const auto total = static_cast<long>(std::ceil(horizon / step - 1e-9));
  for (long n = 0; n < total; ++n) {
    const double h = std::min(step, horizon - t);
    FieldValue next;
    Vector x_next;
    try {
      const auto& k1 = cur.field;
      const FieldValue s2 = vector_field_detailed(op, x + 0.5 * h * k1, params, cur.lambda, options.feedback);
      const FieldValue s3 = vector_field_detailed(op, x + 0.5 * h * s2.field, params, s2.lambda, options.feedback);
      const FieldValue s4 = vector_field_detailed(op, x + h * s3.field, params, s3.lambda, options.feedback);
      x_next = x + (h / 6.0) * (k1 + 2.0 * s2.field + 2.0 * s3.field + s4.field);
      next = vector_field_detailed(op, x_next, params, cur.lambda, options.feedback);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kStationary) throw;
      traj.status = FlowStatus::kStationary;
      break;
    }
    const double residual = ae_residual(next, params);
    if (residual > options.flow_ae_tol) {
      throw Error(ErrorCode::kInnerNonconverged,
                  "step rejected at t = " + std::to_string(t + h) + ": closed-loop residual " +
                      std::to_string(residual));
    }
    traj.max_ae_residual = std::max(traj.max_ae_residual, residual);

    traj.ergodic_num += 0.5 * h * (cur.lambda * cur.y + next.lambda * next.y);
    traj.ergodic_den += 0.5 * h * (cur.lambda + next.lambda);
    t += h;
    x = std::move(x_next);
    cur = std::move(next);
    ++traj.steps;

    const bool stationary = min_norm_residual(op, x) <= options.feedback.stationarity_tol;
    const bool last = (n + 1 == total) || stationary;
    if (last || (traj.steps % options.sample_stride) == 0) {
      traj.samples.push_back(FlowState{t, x, cur.lambda, cur.y, traj.ergodic_num / traj.ergodic_den});
    }
    if (stationary) {
      traj.status = FlowStatus::kStationary;
      break;
    }
  }
  // An early stop between samples still records the last accepted state.
  if (traj.samples.back().t != t) {
    const Vector erg = traj.ergodic_den > 0.0 ? Vector(traj.ergodic_num / traj.ergodic_den) : cur.y;
    traj.samples.push_back(FlowState{t, x, cur.lambda, cur.y, erg});
  }
  return traj;
}

Vector ergodic_point(const Trajectory& traj) {
  if (traj.samples.empty()) throw Error(ErrorCode::kEmptyInput, "empty trajectory");
  if (!(traj.ergodic_den > 0.0)) throw Error(ErrorCode::kEmptyInput, "trajectory has no accumulated weight");
  return traj.ergodic_num / traj.ergodic_den;
}

InvariantReport check_flow_invariants(const Trajectory& traj, const ProblemInstance& problem,
                                      const FeedbackParams& params) {
  if (traj.samples.empty()) throw Error(ErrorCode::kEmptyInput, "empty trajectory");
  const auto& s = traj.samples;
  const double theta = params.theta;
  const int p = params.p;
  InvariantReport rep;

  auto speed = [](const FlowState& st) { return (st.x - st.y).norm(); };

  InvariantResult ae{"algebraic_equation"};
  for (const auto& st : s) {
    const double rel = std::abs(st.lambda * std::pow(speed(st), p - 1) - theta) / theta;
    ae.observe(1e-8 - rel, rel <= 1e-8);
  }
  rep.items.push_back(ae);

  if (p == 1) {
    InvariantResult constant{"lambda_constant"};
    for (const auto& st : s) {
      const double dev = std::abs(st.lambda - theta);
      constant.observe(1e-12 * theta - dev, dev <= 1e-12 * theta);
    }
    rep.items.push_back(constant);
  }

  InvariantResult nondecreasing{"lambda_nondecreasing"};
  InvariantResult growth{"lambda_growth_bound"};
  InvariantResult speed_mono{"speed_nonincreasing"};
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double l0 = s[k].lambda, l1 = s[k + 1].lambda;
    nondecreasing.observe((l1 - l0) / l0 + 1e-9, l1 >= l0 * (1.0 - 1e-9));
    const double cap = l0 * std::exp((p - 1) * (s[k + 1].t - s[k].t)) * (1.0 + 1e-6);
    growth.observe((cap - l1) / l0, l1 <= cap);
    const double v0 = speed(s[k]), v1 = speed(s[k + 1]);
    speed_mono.observe(v0 * (1.0 + 1e-9) + 1e-15 - v1, v1 <= v0 * (1.0 + 1e-9) + 1e-15);
  }
  rep.items.push_back(nondecreasing);
  rep.items.push_back(growth);
  rep.items.push_back(speed_mono);

  if (p >= 2) {
    InvariantResult expo{"speed_exponential_lower_bound"};
    const double v0 = speed(s.front());
    for (const auto& st : s) {
      const double floor = std::exp(-st.t) * v0 * (1.0 - 1e-3);
      expo.observe((speed(st) - floor) / v0, speed(st) >= floor);
    }
    rep.items.push_back(expo);
  }

  if (problem.solution_known()) {
    std::vector<Vector> anchors{nearest_solution(problem, s.front().x)};
    if (const auto* aff = std::get_if<AffineSolution>(&problem.solution)) {
      for (Eigen::Index j = 0; j < aff->basis.cols(); ++j) anchors.push_back(anchors.front() + aff->basis.col(j));
    }
    InvariantResult descent{"lyapunov_descent"};
    for (const auto& z : anchors) {
      const double e0 = lyapunov(s.front().x, z);
      const double slack = 1e-12 * std::max(1.0, e0);
      for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double ek = lyapunov(s[k].x, z), ek1 = lyapunov(s[k + 1].x, z);
        descent.observe(ek + slack - ek1, ek1 <= ek + slack);
      }
    }
    rep.items.push_back(descent);

    const double e0 = lyapunov(s.front().x, anchors.front());
    InvariantResult decay{"speed_decay_bound"};
    InvariantResult lower{"lambda_lower_bound"};
    for (const auto& st : s) {
      if (st.t <= 0.0) continue;
      const double sq = speed(st) * speed(st);
      const double cap = e0 / st.t * (1.0 + 1e-6);
      decay.observe(cap - sq, sq <= cap);
      const double floor = theta * std::pow(st.t / e0, 0.5 * (p - 1)) * (1.0 - 1e-6);
      lower.observe((st.lambda - floor) / std::max(floor, 1e-300), st.lambda >= floor);
    }
    rep.items.push_back(decay);
    rep.items.push_back(lower);
  }
  return rep;
}

}  // namespace monoflow
