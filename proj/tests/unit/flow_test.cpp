#include <cmath>

#include <gtest/gtest.h>

#include "monoflow/error.hpp"
#include "monoflow/flow.hpp"
#include "monoflow/metrics.hpp"
#include "monoflow/problems.hpp"

using namespace monoflow;

namespace {

ProblemInstance identity_problem(int d) {
  auto p = make_strongly_monotone_affine(d, 1.0, 0.0);
  p.name = "identity";
  return p;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

// tests/oracles/derive.py
constexpr double kExpHalf = 0.60653065971263342;
constexpr double kExpTheta03 = 0.7939226578179513;

}  // namespace

TEST(VectorField, OrderOneIdentity) {
  const auto p = identity_problem(2);
  const double theta = 0.3;
  const Vector x = vec({1.0, -2.0});
  EXPECT_TRUE(vector_field(p.op, x, FeedbackParams{theta, 1}).isApprox(-theta / (1 + theta) * x, 1e-14));
}

TEST(VectorField, StationaryThrows) {
  try {
    vector_field(identity_problem(2).op, Vector::Zero(2), FeedbackParams{0.3, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStationary);
  }
}

TEST(VectorField, NormMatchesClosedLoopLaw) {
  const auto p = make_bilinear_saddle(4);
  const Vector x = vec({0.5, -0.2, 0.1, 0.7});
  for (int order : {2, 3}) {
    const FeedbackParams params{0.4, order};
    const auto f = vector_field_detailed(p.op, x, params);
    EXPECT_NEAR(std::pow(f.field.norm(), order - 1) * f.lambda, params.theta, 1e-8);
  }
}

TEST(Integrate, IdentityClosedForm) {
  const auto p = identity_problem(1);
  // theta = 1 sits outside the continuous-analysis range; p = 1 does not need it
  const auto traj = integrate(p, vec({1}), FeedbackParams{1.0, 1, true}, 1.0, 1e-3);
  EXPECT_NEAR(traj.samples.back().t, 1.0, 1e-12);
  EXPECT_NEAR(traj.samples.back().x(0), kExpHalf, 1e-6);

  const auto traj2 = integrate(p, vec({1}), FeedbackParams{0.3, 1}, 1.0, 1e-3);
  EXPECT_NEAR(traj2.samples.back().x(0), kExpTheta03, 1e-6);
}

TEST(Integrate, ZeroHorizonSingleSample) {
  const auto traj = integrate(make_bilinear_saddle(2), vec({0.5, 0.5}), FeedbackParams{0.3, 2}, 0.0, 0.01);
  ASSERT_EQ(traj.samples.size(), 1u);
  EXPECT_EQ(traj.samples[0].x, vec({0.5, 0.5}));
  EXPECT_EQ(traj.samples[0].t, 0.0);
}

TEST(Integrate, SkewDistanceNonincreasing) {
  const auto traj = integrate(make_bilinear_saddle(2), vec({0.6, -0.3}), FeedbackParams{0.5, 1}, 5.0, 0.01);
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    EXPECT_LE(traj.samples[i].x.norm(), traj.samples[i - 1].x.norm() + 1e-14);
  }
}

TEST(Integrate, RejectsBadStep) {
  EXPECT_THROW(integrate(make_bilinear_saddle(2), vec({0.5, 0.5}), FeedbackParams{0.3, 2}, 1.0, 0.0), Error);
}

TEST(Integrate, RejectsStationaryStart) {
  try {
    integrate(make_bilinear_saddle(2), Vector::Zero(2), FeedbackParams{0.3, 2}, 1.0, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStationary);
  }
}

TEST(Integrate, HaltsWhenStationaryReached) {
  // p = 2 on the bilinear saddle reaches the zero in finite time
  const auto traj = integrate(make_bilinear_saddle(2), vec({0.5, 0.5}), FeedbackParams{0.05, 2}, 200.0, 0.01);
  EXPECT_EQ(traj.status, FlowStatus::kStationary);
  EXPECT_LT(traj.samples.back().t, 200.0);
  EXPECT_LE(traj.samples.back().x.norm(), 1e-6);
}

TEST(Ergodic, ConstantPath) {
  Trajectory t;
  t.samples.push_back(FlowState{0.0, vec({1, 2}), 1.0, vec({1, 2}), vec({1, 2})});
  t.ergodic_num = vec({3, 6});
  t.ergodic_den = 3;
  EXPECT_EQ(ergodic_point(t), vec({1, 2}));
}

TEST(Ergodic, TrapezoidWeightsOnIdentity) {
  // p = 1 keeps lambda = theta, so the ergodic point is the time average of
  // y(t) = x(t)/(1+theta) = e^{-ct}/(1+theta); quadrature error is O(h^2)
  const double theta = 1.0, c = theta / (1 + theta), horizon = 2.0;
  const double exact = (1 - std::exp(-c * horizon)) / (c * horizon) / (1 + theta);
  double prev = 0;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto traj = integrate(identity_problem(1), vec({1}), FeedbackParams{theta, 1, true}, horizon, h);
    const double err = std::abs(ergodic_point(traj)(0) - exact);
    if (prev > 0) EXPECT_NEAR(prev / err, 4.0, 0.2);
    prev = err;
  }
}

TEST(Invariants, OrderOneConstantLambda) {
  const auto p = make_bilinear_saddle(2);
  const FeedbackParams params{0.4, 1};
  const auto traj = integrate(p, vec({0.7, 0.1}), params, 3.0, 0.01);
  for (const auto& s : traj.samples) EXPECT_EQ(s.lambda, 0.4);
  EXPECT_TRUE(check_flow_invariants(traj, p, params).all_passed());
}

TEST(Invariants, OrderTwoIdentityMonotoneLambda) {
  const auto p = identity_problem(2);
  const FeedbackParams params{0.3, 2};
  const auto traj = integrate(p, vec({1, 1}), params, 3.0, 0.01);
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    EXPECT_GE(traj.samples[i].lambda, traj.samples[i - 1].lambda);
  }
  const auto rep = check_flow_invariants(traj, p, params);
  EXPECT_TRUE(rep.all_passed());
}

TEST(Invariants, OrderTwoExponentialLowerBound) {
  const auto p = make_bilinear_saddle(4);
  const FeedbackParams params{0.3, 2};
  const auto traj = integrate(p, vec({0.5, -0.2, 0.1, 0.7}), params, 4.0, 0.01);
  const double initial = (traj.samples[0].x - traj.samples[0].y).norm();
  for (const auto& s : traj.samples) {
    EXPECT_GE((s.x - s.y).norm(), std::exp(-s.t) * initial * (1 - 1e-3));
  }
  EXPECT_TRUE(check_flow_invariants(traj, p, params).all_passed());
}

TEST(Integrate, SamplingStride) {
  FlowOptions opt;
  opt.sample_stride = 10;
  const auto traj = integrate(make_bilinear_saddle(2), vec({0.5, 0.5}), FeedbackParams{0.3, 1}, 1.0, 0.01, opt);
  EXPECT_EQ(traj.samples.size(), 11u);
  EXPECT_NEAR(traj.samples.back().t, 1.0, 1e-12);
}
