#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "monoflow/enlargement.hpp"
#include "monoflow/error.hpp"
#include "monoflow/inclusion_solver.hpp"
#include "monoflow/operator.hpp"
#include "monoflow/resolvent.hpp"

using namespace monoflow;

namespace {

OperatorSpec affine_op(Matrix m, Vector q, ConvexSet domain = {}) {
  OperatorParts parts;
  parts.affine = AffinePart{std::move(m), std::move(q)};
  parts.domain = std::move(domain);
  return OperatorSpec(std::move(parts));
}

OperatorSpec identity_op(int d) { return affine_op(Matrix::Identity(d, d), Vector::Zero(d)); }

OperatorSpec skew2() {
  Matrix m(2, 2);
  m << 0, 1, -1, 0;
  return affine_op(m, Vector::Zero(2));
}

OperatorSpec cubic_op(ConvexSet domain = {}) {
  OperatorParts parts;
  parts.poly1d = Polynomial{{0, 0, 0, 1}};
  parts.domain = std::move(domain);
  parts.dim = 1;
  parts.smoothness = {3, 6};
  return OperatorSpec(std::move(parts));
}

Box unit_box(int d) { return Box{-Vector::Ones(d), Vector::Ones(d)}; }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

}  // namespace

TEST(Evaluate, IdentityReturnsInput) {
  EXPECT_TRUE(evaluate_single_valued(identity_op(2), vec({1, 2})).isApprox(vec({1, 2})));
}

TEST(Evaluate, SkewRotation) {
  EXPECT_EQ(evaluate_single_valued(skew2(), vec({1, 0})), vec({0, -1}));
}

TEST(Evaluate, CubicPolynomial) {
  EXPECT_DOUBLE_EQ(evaluate_single_valued(cubic_op(), vec({2}))(0), 8.0);
}

TEST(Operator, RejectsNonMonotoneMatrix) {
  Matrix m = -Matrix::Identity(2, 2);
  EXPECT_THROW(
      {
        try {
          affine_op(m, Vector::Zero(2));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kNotMonotone);
          throw;
        }
      },
      Error);
}

TEST(Operator, RejectsDecreasingPolynomial) {
  OperatorParts parts;
  parts.poly1d = Polynomial{{0, -1}};
  parts.dim = 1;
  EXPECT_THROW(OperatorSpec{parts}, Error);
}

TEST(Operator, RejectsDimensionMismatch) {
  OperatorParts parts;
  parts.affine = AffinePart{Matrix::Identity(2, 2), Vector::Zero(3)};
  EXPECT_THROW(OperatorSpec{parts}, Error);
}

TEST(Resolvent, IdentityHalves) {
  const auto r = resolvent(identity_op(2), 1.0, vec({2, 4}));
  EXPECT_NEAR((r.y - vec({1, 2})).norm(), 0.0, 1e-14);
  EXPECT_NEAR((r.v - vec({1, 2})).norm(), 0.0, 1e-14);
}

TEST(Resolvent, SkewLinearSolve) {
  const auto r = resolvent(skew2(), 1.0, vec({1, 0}));
  EXPECT_NEAR(r.y(0), 0.5, 1e-14);
  EXPECT_NEAR(r.y(1), 0.5, 1e-14);
}

TEST(Resolvent, NormalConeIsProjection) {
  OperatorParts parts;
  parts.domain = unit_box(2);
  const OperatorSpec op(parts);
  for (double lambda : {0.1, 3.0, 1e6}) {
    const auto r = resolvent(op, lambda, vec({2, 0.5}));
    EXPECT_EQ(r.y, vec({1, 0.5}));
  }
}

TEST(Resolvent, CubicScalarRoot) {
  EXPECT_NEAR(resolvent(cubic_op(), 1.0, vec({2})).y(0), 1.0, 1e-12);
  EXPECT_NEAR(solve_scalar_resolvent(Polynomial{{0, 0, 0, 1}}, 1.0, 2.0), 1.0, 1e-12);
}

TEST(Resolvent, CubicClampedToBox) {
  // y + y^3 = 10 has root 2 > 1, so the clamp is active and v carries a normal component
  const auto r = resolvent(cubic_op(Box{vec({-1}), vec({1})}), 1.0, vec({10}));
  EXPECT_DOUBLE_EQ(r.y(0), 1.0);
  EXPECT_NEAR(r.v(0), 9.0, 1e-12);
  EXPECT_LE(membership_violation(cubic_op(Box{vec({-1}), vec({1})}), r.y, r.v), 1e-9);
}

TEST(Resolvent, RejectsNonPositiveLambda) {
  EXPECT_THROW(resolvent(identity_op(1), 0.0, vec({1})), Error);
  EXPECT_THROW(resolvent(identity_op(1), -1.0, vec({1})), Error);
}

TEST(Resolvent, RandomAffineBoxNonexpansiveAndMember) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 4;
    Matrix s(d, d);
    for (int i = 0; i < d * d; ++i) s.data()[i] = n(rng);
    const Matrix m = 0.2 * Matrix::Identity(d, d) + (s - s.transpose()) * 3.0;
    Vector q(d);
    for (int i = 0; i < d; ++i) q(i) = n(rng);
    const OperatorSpec op = affine_op(m, q, unit_box(d));
    const double lambda = std::exp(4.0 * n(rng));
    Vector x1(d), x2(d);
    for (int i = 0; i < d; ++i) {
      x1(i) = 2 * n(rng);
      x2(i) = 2 * n(rng);
    }
    const auto r1 = resolvent(op, lambda, x1);
    const auto r2 = resolvent(op, lambda, x2);
    EXPECT_LE((r1.y - r2.y).norm(), (x1 - x2).norm() * (1 + 1e-9) + 1e-12);
    EXPECT_LE(membership_violation(op, r1.y, r1.v), 1e-7 * std::max(1.0, r1.v.norm()));
    EXPECT_LE(domain_distance(op, r1.y), 0.0);
  }
}

TEST(Project, BoxClamp) { EXPECT_EQ(project(unit_box(2), vec({3, 0})), vec({1, 0})); }

TEST(Project, BallRadial) {
  EXPECT_TRUE(project(Ball{Vector::Zero(2), 1.0}, vec({0, 2})).isApprox(vec({0, 1})));
}

TEST(Project, WholeSpaceIdentity) {
  EXPECT_EQ(project_domain(identity_op(2), vec({5, -7})), vec({5, -7}));
}

TEST(InclusionSolver, LargeLambdaNearInteriorZero) {
  // 1-d affine on a ball with its zero inside; lambda G(y) cancels to ~1e-9
  // out of terms of size 3e-2, so the attainable residual scales with lambda
  const double m = 0.027974058578348473, q = 0.029498807642358127;
  auto field = [&](const Vector& y) { return Vector::Constant(1, m * y(0) + q); };
  auto jac = [&](const Vector&) { return Matrix::Constant(1, 1, m); };
  const ConvexSet ball = Ball{Vector::Zero(1), 1.5};
  const Vector x = vec({-0.9908379354241279});
  for (double lambda : {1.0, 1e4, 8.9e7, 1e12}) {
    const auto sol = solve_inclusion(field, jac, ball, lambda, x, x);
    const double exact = (x(0) - lambda * q) / (1 + lambda * m);
    EXPECT_NEAR(sol.y(0), exact, 1e-12) << lambda;
  }
}

TEST(MembershipViolation, BoundaryNormal) {
  const OperatorSpec op = affine_op(Matrix::Zero(1, 1), vec({-3}), Box{vec({-1}), vec({1})});
  EXPECT_NEAR(membership_violation(op, vec({1}), vec({0})), 0.0, 1e-12);
  EXPECT_NEAR(membership_violation(op, vec({1}), vec({-4})), 1.0, 1e-12);
  EXPECT_TRUE(std::isinf(membership_violation(op, vec({2}), vec({0}))));
}

TEST(Taylor, AffineIsExactAtOrderTwo) {
  const OperatorSpec op = skew2();
  EXPECT_TRUE(taylor_surrogate(op, vec({0.3, -2}), 2, vec({1, 1})).isApprox(evaluate_single_valued(op, vec({1, 1}))));
}

TEST(Taylor, CubicAtOneOrderThree) {
  for (double u : {-2.0, 0.0, 0.5, 3.0}) {
    const double expect = 1 + 3 * (u - 1) + 3 * (u - 1) * (u - 1);
    EXPECT_NEAR(taylor_surrogate(cubic_op(), vec({1}), 3, vec({u}))(0), expect, 1e-12);
  }
}

TEST(Taylor, CubicAtZeroVanishes) {
  EXPECT_EQ(taylor_surrogate(cubic_op(), vec({0}), 3, vec({5}))(0), 0.0);
}

TEST(Taylor, OrderOneFreezesAnchor) {
  EXPECT_EQ(taylor_surrogate(cubic_op(), vec({2}), 1, vec({-7}))(0), 8.0);
}

TEST(Taylor, JacobianMatchesFiniteDifference) {
  OperatorParts parts;
  parts.norm_cubic = 1.0;
  parts.dim = 3;
  const OperatorSpec op(parts);
  const Vector a = vec({0.3, -0.2, 0.5}), u = vec({-0.1, 0.4, 0.2});
  for (int p : {1, 2, 3}) {
    const Matrix j = taylor_surrogate_jacobian(op, a, p, u);
    for (int k = 0; k < 3; ++k) {
      Vector e = Vector::Zero(3);
      e(k) = 1e-6;
      const Vector fd = (taylor_surrogate(op, a, p, u + e) - taylor_surrogate(op, a, p, u - e)) / 2e-6;
      EXPECT_NEAR((j.col(k) - fd).norm(), 0.0, 1e-8) << "p=" << p;
    }
  }
}

TEST(Enlargement, ExactMemberPasses) {
  const OperatorSpec op = skew2();
  const Vector x = vec({0.2, -0.4});
  const auto rep = eps_enlargement_check(op, x, evaluate_single_valued(op, x), 0.0, 200, 3);
  EXPECT_TRUE(rep.passed);
  EXPECT_GE(rep.worst_margin, -1e-10);
}

TEST(Enlargement, WitnessFalsifiesWrongVector) {
  // identity, x = 0, v = 1 against x~ = 0.5, v~ = 0.5: <-0.5, 0.5> = -0.25
  const std::vector<Witness> w{{vec({0.5}), vec({0.5})}};
  const auto rep = check_enlargement(vec({0}), vec({1}), 0.0, w);
  EXPECT_FALSE(rep.passed);
  EXPECT_NEAR(rep.min_inner_product, -0.25, 1e-15);
  const std::vector<Witness> ok{{vec({2}), vec({2})}, {vec({-1}), vec({-1})}};
  EXPECT_TRUE(check_enlargement(vec({0}), vec({1}), 0.0, ok).passed);
}

TEST(Enlargement, LargeEpsAdmitsEverything) {
  const OperatorSpec op = identity_op(2);
  const auto rep = eps_enlargement_check(op, vec({0, 0}), vec({50, -50}), 1e6, 100, 11);
  EXPECT_TRUE(rep.passed);
}

TEST(Enlargement, WitnessesAreDeterministicGraphPoints) {
  OperatorParts parts;
  parts.affine = AffinePart{Matrix::Identity(2, 2), Vector::Zero(2)};
  parts.domain = unit_box(2);
  const OperatorSpec op(parts);
  const auto a = sample_witnesses(op, Vector::Zero(2), 1.5, 40, 5);
  const auto b = sample_witnesses(op, Vector::Zero(2), 1.5, 40, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].v, b[i].v);
    EXPECT_LE(membership_violation(op, a[i].x, a[i].v), 1e-9);
  }
}
