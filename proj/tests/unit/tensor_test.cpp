#include <cmath>

#include <gtest/gtest.h>

#include "monoflow/enlargement.hpp"
#include "monoflow/error.hpp"
#include "monoflow/tensor.hpp"

using namespace monoflow;

namespace {

ProblemInstance identity_problem(int d) { return make_strongly_monotone_affine(d, 1.0, 0.0); }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

TensorConfig config(int p, double lipschitz) {
  TensorConfig cfg;
  cfg.p = p;
  cfg.lipschitz = lipschitz;
  cfg.sigma_hat = 0.1;
  cfg.sigma_l = 0.1;
  cfg.sigma_u = 0.5;
  return cfg;
}

}  // namespace

TEST(Config, StepZeroConstraint) {
  auto cfg = config(3, 1.0);
  EXPECT_NO_THROW(cfg.validate());
  cfg.sigma_l = 0.4;
  cfg.sigma_u = 0.45;
  cfg.sigma_hat = 0.3;
  // 0.4 * 1.69 = 0.676 > 0.45 * 0.49
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Config, SigmaSumBelowOne) {
  auto cfg = config(2, 1.0);
  cfg.sigma_hat = 0.5;
  cfg.sigma_u = 0.6;
  cfg.sigma_l = 0.01;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Config, FrameworkParameters) {
  const auto cfg = config(3, 6.0);
  const auto h = cfg.as_hpe();
  EXPECT_DOUBLE_EQ(h.sigma, 0.6);
  EXPECT_DOUBLE_EQ(h.theta, 0.1 * 6 / 6.0);
  EXPECT_EQ(h.p, 3);
}

TEST(Surrogate, AffineExactSolve) {
  const auto prob = make_strongly_monotone_affine(3, 0.5, 1.0, 3);
  const Vector x = vec({0.4, -1.0, 2.0});
  const double lambda = 1.7;
  const auto s = surrogate_resolvent(prob, x, x, lambda, config(2, 1.0));
  const Matrix m = prob.op.affine()->matrix;
  const Vector q = prob.op.affine()->offset;
  const Vector expect = (Matrix::Identity(3, 3) + lambda * m).lu().solve(x - lambda * q);
  EXPECT_NEAR((s.y - expect).norm(), 0.0, 1e-12);
  EXPECT_NEAR((s.u - evaluate_single_valued(prob.op, s.y)).norm(), 0.0, 1e-12);
  EXPECT_LE(s.inexactness, 1e-12);
}

TEST(Surrogate, CubicAtZeroIsFlat) {
  const auto s = surrogate_resolvent(make_cubic_1d(), vec({0}), vec({2}), 1.0, config(3, 6.0));
  EXPECT_NEAR(s.y(0), 2.0, 1e-14);
  EXPECT_NEAR(s.u(0), 0.0, 1e-14);
}

TEST(Surrogate, InexactnessBound) {
  const auto prob = make_convex_gradient(2);
  const auto cfg = config(3, 6.0);
  const Vector x = vec({0.6, -0.3});
  for (double lambda : {0.01, 0.3, 2.0}) {
    const auto s = surrogate_resolvent(prob, x, x, lambda, cfg);
    EXPECT_LE(s.inexactness, cfg.sigma_hat * (s.y - x).norm() + 1e-15);
  }
}

TEST(Window, OrderOneMidpoint) {
  const auto cfg = config(1, 2.0);
  const auto w = lambda_window_search(make_bilinear_saddle(2), vec({0.5, 0.5}), cfg, 1.0);
  EXPECT_GE(w.lambda, cfg.window_low());
  EXPECT_LE(w.lambda, cfg.window_high());
  EXPECT_NEAR(w.lambda, std::sqrt(cfg.window_low() * cfg.window_high()), 1e-12);
}

TEST(Window, IdentityOrderTwo) {
  // lambda^2/(1+lambda) must land in [0.2, 1.0]; lambda = 1 gives 0.5
  const auto cfg = config(2, 1.0);
  const Vector x = vec({1, 0});
  const auto w = lambda_window_search(identity_problem(2), x, cfg, 1.0);
  const double value = w.lambda * (w.y - x).norm();
  EXPECT_GE(value, 0.2 * (1 - 1e-12));
  EXPECT_LE(value, 1.0 * (1 + 1e-12));
  EXPECT_NEAR(value, w.lambda * w.lambda / (1 + w.lambda), 1e-12);
}

TEST(Window, BracketsFromFarHints) {
  const auto cfg = config(2, 1.0);
  const Vector x = vec({1, 0});
  for (double hint : {1e-8, 1e8}) {
    const auto w = lambda_window_search(identity_problem(2), x, cfg, hint);
    const double value = w.lambda * (w.y - x).norm();
    EXPECT_GE(value, cfg.window_low() * (1 - 1e-12));
    EXPECT_LE(value, cfg.window_high() * (1 + 1e-12));
    EXPECT_LE(w.evaluations, cfg.max_window_evals);
  }
}

TEST(Window, BudgetExhaustion) {
  auto cfg = config(2, 1.0);
  cfg.max_window_evals = 1;
  try {
    lambda_window_search(identity_problem(2), vec({1, 0}), cfg, 1e-8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWindowUnreachable);
  }
}

TEST(Oracle, AffineReducesToProximalStep) {
  const auto prob = make_bilinear_saddle(4);
  const Vector x = vec({0.5, -0.2, 0.3, 0.9});
  const auto s = tensor_oracle(prob, x, config(2, 1.0));
  EXPECT_EQ(s.eps, 0.0);
  EXPECT_NEAR((s.lambda * s.v + s.y - x).norm(), 0.0, 1e-10);
}

TEST(Oracle, StepsPassFrameworkCertificates) {
  struct Case {
    ProblemInstance prob;
    int p;
    double L;
    Vector x0;
  };
  std::vector<Case> cases{
      {make_bilinear_saddle(2), 2, 1.0, vec({0.5, -0.5})},
      {make_bilinear_saddle(4), 1, 1.0, vec({0.5, -0.5, 0.2, 0.1})},
      {make_cubic_1d(), 3, 6.0, vec({0.9})},
      {make_convex_gradient(2), 3, 6.0, vec({0.5, 0.4})},
  };
  for (auto& c : cases) {
    auto cfg = config(c.p, c.L);
    cfg.max_iters = 40;
    auto h = cfg.as_hpe();
    const auto r = run(c.prob, make_tensor_oracle(c.prob, cfg), h, c.x0);
    ASSERT_FALSE(r.records.empty());
    for (const auto& rec : r.records) {
      EXPECT_TRUE(verify_step(h, rec.x_prev, rec.lambda, rec.y, rec.v, rec.eps).ok()) << c.prob.name;
    }
  }
}

TEST(Oracle, BilinearVIsInGraph) {
  const auto prob = make_bilinear_saddle(2);
  const Vector x = vec({1.4, -0.3});
  const auto s = tensor_oracle(prob, x, config(2, 1.0));
  EXPECT_LE(membership_violation(prob.op, s.y, s.v), 1e-8);
  const auto rep = eps_enlargement_check(prob.op, s.y, s.v, 0.0, 200, 17);
  EXPECT_GE(rep.worst_margin, -1e-8);
}
