#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "monoflow/error.hpp"
#include "monoflow/metrics.hpp"
#include "monoflow/problems.hpp"

using namespace monoflow;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

ProblemInstance affine_box(Matrix m, Vector q, double lo = -1, double hi = 1) {
  const auto d = m.rows();
  OperatorParts parts;
  parts.affine = AffinePart{std::move(m), std::move(q)};
  parts.domain = Box{Vector::Constant(d, lo), Vector::Constant(d, hi)};
  return ProblemInstance{"affine_box", OperatorSpec(parts), UnknownSolution{}, std::nullopt, 1, 0.0};
}

// Dense 101 x 101 grid over [-1,1]^2, then five zoom rounds on a 21 x 21
// grid around the incumbent, shrinking the half-width by 10 each round.
double grid_gap(const Matrix& m, const Vector& q, const Vector& x) {
  auto obj = [&](double a, double b) {
    const Vector z = vec({a, b});
    return (m * z + q).dot(x - z);
  };
  double best = -1e300, ba = 0, bb = 0;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double a = -1 + 0.02 * i, b = -1 + 0.02 * j;
      const double v = obj(a, b);
      if (v > best) best = v, ba = a, bb = b;
    }
  }
  double half = 0.02;
  for (int round = 0; round < 6; ++round) {
    const double ca = ba, cb = bb;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        const double a = std::clamp(ca + half * i / 10, -1.0, 1.0);
        const double b = std::clamp(cb + half * j / 10, -1.0, 1.0);
        const double v = obj(a, b);
        if (v > best) best = v, ba = a, bb = b;
      }
    }
    half /= 10;
  }
  return best;
}

}  // namespace

TEST(Gap, BilinearZeroAtSolution) { EXPECT_EQ(gap(make_bilinear_saddle(2), vec({0, 0})), 0.0); }

TEST(Gap, BilinearCornerValue) {
  EXPECT_NEAR(gap(make_bilinear_saddle(2), vec({0.5, 0.5})), 1.0, 1e-14);
  // |x1| + |x2| in general
  EXPECT_NEAR(gap(make_bilinear_saddle(2), vec({-0.25, 0.6})), 0.85, 1e-14);
}

TEST(Gap, MatchesDenseGridOracle) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    Matrix m(2, 2);
    const double a = n(rng), b = n(rng), c = n(rng);
    m << std::abs(a) + 0.1 * std::abs(c), b, -b + 0.2 * c, std::abs(c) + 0.1 * std::abs(a);
    const Vector q = vec({0.3 * n(rng), 0.3 * n(rng)});
    const Vector x = vec({u(rng), u(rng)});
    const auto prob = affine_box(m, q);
    const auto g = gap_detailed(prob, x);
    EXPECT_NEAR(g.value, grid_gap(m, q, x), 1e-6) << i;
    EXPECT_LE(g.kkt_residual, 1e-8);
  }
}

TEST(Gap, OutsideDomainAndUnsupported) {
  try {
    gap(make_bilinear_saddle(2), vec({2, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotInDomain);
  }
  EXPECT_THROW(gap(make_cubic_1d(), vec({0.1})), Error);
  EXPECT_THROW(gap(make_strongly_monotone_affine(2, 1.0), vec({0.1, 0.1})), Error);
}

TEST(Residue, InteriorIsFieldNorm) {
  const auto p = make_bilinear_saddle(4, 3.0);
  const Vector x = vec({0.1, -0.2, 0.3, 0.4});
  EXPECT_NEAR(residue(p, x), evaluate_single_valued(p.op, x).norm(), 1e-15);
}

TEST(Residue, OneDimensionalBoundary) {
  // F = -3 at the upper bound: the outward normal cone absorbs it
  EXPECT_NEAR(residue(affine_box(Matrix::Zero(1, 1), vec({-3})), vec({1})), 0.0, 1e-15);
  // F = +3 at the upper bound: normal components only make it worse
  EXPECT_NEAR(residue(affine_box(Matrix::Zero(1, 1), vec({3})), vec({1})), 3.0, 1e-15);
}

TEST(Residue, OutsideDomain) {
  EXPECT_THROW(residue(make_bilinear_saddle(2), vec({1.5, 0})), Error);
}

TEST(Lyapunov, Values) {
  EXPECT_EQ(lyapunov(vec({1, 2}), vec({1, 2})), 0.0);
  EXPECT_DOUBLE_EQ(lyapunov(vec({3, 4}), vec({0, 0})), 12.5);
  const Vector c = vec({-7, 0.25});
  EXPECT_DOUBLE_EQ(lyapunov(vec({3, 4}) + c, vec({1, 1}) + c), lyapunov(vec({3, 4}), vec({1, 1})));
}

TEST(Distance, SingletonAndAffine) {
  const auto p = make_bilinear_saddle(2);
  EXPECT_DOUBLE_EQ(dist_to_solutions(p, vec({1, 1})), std::sqrt(2.0));
  EXPECT_EQ(dist_to_solutions(p, vec({0, 0})), 0.0);

  auto line = p;
  line.solution = AffineSolution{Vector::Zero(2), vec({1, 0})};
  EXPECT_NEAR(dist_to_solutions(line, vec({5, 3})), 3.0, 1e-15);
  EXPECT_NEAR((nearest_solution(line, vec({5, 3})) - vec({5, 0})).norm(), 0.0, 1e-15);
}

TEST(Distance, UnknownSolution) {
  try {
    dist_to_solutions(affine_box(Matrix::Identity(1, 1), vec({0})), vec({0.5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownSolution);
  }
}

TEST(FitRate, ExactPowerLaw) {
  Series s;
  for (int k = 1; k <= 200; ++k) s.emplace_back(k, std::pow(k, -1.5));
  const auto f = fit_rate(s, 0.5);
  EXPECT_NEAR(f.slope, -1.5, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.points, 100);
}

TEST(FitRate, Constant) {
  Series s;
  for (int k = 1; k <= 50; ++k) s.emplace_back(k, 7.0);
  EXPECT_NEAR(fit_rate(s, 1.0).slope, 0.0, 1e-14);
}

TEST(FitRate, PerturbedPowerLaw) {
  Series s;
  for (int k = 1; k <= 1000; ++k) s.emplace_back(k, 3 * std::pow(k, -2.0) * (1 + 0.01 * std::sin(k)));
  const auto f = fit_rate(s, 0.5);
  // tests/oracles/derive.py
  EXPECT_NEAR(f.slope, -1.9999005778328367, 1e-9);
  EXPECT_NEAR(f.slope, -2.0, 0.02);
}

TEST(FitRate, DropsFloorValues) {
  Series s;
  for (int k = 1; k <= 40; ++k) s.emplace_back(k, k <= 30 ? 1.0 / k : 0.0);
  const auto f = fit_rate(s, 1.0);
  EXPECT_EQ(f.dropped, 10);
  EXPECT_NEAR(f.slope, -1.0, 1e-12);
}

TEST(FitRate, InsufficientPoints) {
  Series s;
  for (int k = 1; k <= 15; ++k) s.emplace_back(k, 1.0 / k);
  try {
    fit_rate(s, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientPoints);
  }
}

TEST(FitExponential, RecoversRate) {
  Series s;
  for (int k = 0; k <= 100; ++k) s.emplace_back(0.1 * k, 2.0 * std::exp(-0.8 * 0.1 * k));
  const auto f = fit_exponential(s, 0.5);
  EXPECT_NEAR(f.slope, -0.8, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}
