#pragma once

#include <optional>
#include <vector>

#include "monoflow/feedback.hpp"
#include "monoflow/problems.hpp"
#include "monoflow/report.hpp"

namespace monoflow {

struct FlowState {
  double t = 0;
  Vector x;
  double lambda = 0;
  Vector y;         // J_lambda x
  Vector ergodic;   // lambda-weighted running average of y up to t
};

enum class FlowStatus { kCompleted, kStationary };

struct Trajectory {
  std::vector<FlowState> samples;
  Vector ergodic_num;       // int_0^t lambda(s) y(s) ds
  double ergodic_den = 0;   // int_0^t lambda(s) ds
  FlowStatus status = FlowStatus::kCompleted;
  int steps = 0;
  double max_ae_residual = 0;  // max relative residual of the closed-loop law
};

struct FlowOptions {
  int sample_stride = 1;
  double flow_ae_tol = 1e-8;
  FeedbackOptions feedback;
};

struct FieldValue {
  Vector field;   // J_lambda x - x
  double lambda = 0;
  Vector y;
};

// F(x) = J_{Lambda_theta(x)} x - x, warm-started from `hint`.
FieldValue vector_field_detailed(const OperatorSpec& op, const Vector& x, const FeedbackParams& params,
                                 std::optional<double> hint = std::nullopt,
                                 const FeedbackOptions& options = {});
Vector vector_field(const OperatorSpec& op, const Vector& x, const FeedbackParams& params);

// Classical RK4 on x' = J_{lambda(t)} x - x with lambda re-solved at every
// stage. Ergodic accumulators use the trapezoid rule on step endpoints.
// Stops early with status kStationary once res(x) <= stationarity_tol.
Trajectory integrate(const ProblemInstance& problem, const Vector& x0, const FeedbackParams& params,
                     double horizon, double step, const FlowOptions& options = {});

Vector ergodic_point(const Trajectory& traj);

// Closed-loop law, monotone/growth-bounded lambda, Lyapunov descent, speed
// decay and lower bounds evaluated on the samples.
InvariantReport check_flow_invariants(const Trajectory& traj, const ProblemInstance& problem,
                                      const FeedbackParams& params);

}  // namespace monoflow
