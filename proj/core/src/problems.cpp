#include "monoflow/problems.hpp"

#include <limits>
#include <random>

#include "monoflow/error.hpp"

namespace monoflow {

ProblemInstance make_bilinear_saddle(int d, double scale) {
  if (d <= 0 || d % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "bilinear saddle needs an even dimension d > 0");
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bilinear saddle needs scale > 0");
  const int half = d / 2;
  Matrix m = Matrix::Zero(d, d);
  m.topRightCorner(half, half) = scale * Matrix::Identity(half, half);
  m.bottomLeftCorner(half, half) = -scale * Matrix::Identity(half, half);

  OperatorParts parts;
  parts.affine = AffinePart{m, Vector::Zero(d)};
  parts.domain = Box{Vector::Constant(d, -1.0), Vector::Constant(d, 1.0)};
  parts.smoothness = {1, scale};

  // Interior points have res = scale * ||x||; every boundary point has
  // res >= scale, so delta = scale / 2 keeps the bound on the interior.
  return ProblemInstance{
      .name = "bilinear_saddle",
      .op = OperatorSpec(std::move(parts)),
      .solution = SingletonSolution{Vector::Zero(d)},
      .error_bound = ErrorBound{1.0 / scale, 0.5 * scale},
      .order_p = 1,
      .lipschitz = scale,
  };
}

ProblemInstance make_strongly_monotone_affine(int d, double mu, double skew_scale, std::uint64_t seed) {
  if (d <= 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  if (!(mu > 0.0)) throw Error(ErrorCode::kInvalidArgument, "mu must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = unit(rng);
  }
  const Matrix skew = 0.5 * skew_scale * (g - g.transpose());
  const Matrix m = mu * Matrix::Identity(d, d) + skew;

  OperatorParts parts;
  parts.affine = AffinePart{m, Vector::Zero(d)};
  const double lip = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  parts.smoothness = {1, lip};
  return ProblemInstance{
      .name = "strongly_monotone_affine",
      .op = OperatorSpec(std::move(parts)),
      .solution = SingletonSolution{Vector::Zero(d)},
      .error_bound = ErrorBound{1.0 / mu, std::numeric_limits<double>::infinity()},
      .order_p = 1,
      .lipschitz = lip,
  };
}

ProblemInstance make_cubic_1d() {
  OperatorParts parts;
  parts.poly1d = Polynomial{{0.0, 0.0, 0.0, 1.0}};
  parts.dim = 1;
  parts.smoothness = {3, 6.0};
  return ProblemInstance{
      .name = "cubic_1d",
      .op = OperatorSpec(std::move(parts)),
      .solution = SingletonSolution{Vector::Zero(1)},
      .error_bound = std::nullopt,
      .order_p = 3,
      .lipschitz = 6.0,
  };
}

ProblemInstance make_convex_gradient(int d) {
  if (d <= 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  OperatorParts parts;
  parts.norm_cubic = 1.0;
  parts.dim = d;
  parts.smoothness = {3, 6.0};
  return ProblemInstance{
      .name = "convex_gradient",
      .op = OperatorSpec(std::move(parts)),
      .solution = SingletonSolution{Vector::Zero(d)},
      .error_bound = std::nullopt,
      .order_p = 3,
      .lipschitz = 6.0,
  };
}

std::vector<std::string> problem_names() {
  return {"bilinear_saddle", "strongly_monotone_affine", "cubic_1d", "convex_gradient"};
}

ProblemInstance make_problem(const ProblemSpec& spec) {
  try {
    if (spec.name == "bilinear_saddle") return make_bilinear_saddle(spec.d, spec.scale);
    if (spec.name == "strongly_monotone_affine") {
      return make_strongly_monotone_affine(spec.d, spec.mu, spec.skew_scale, spec.seed);
    }
    if (spec.name == "cubic_1d") return make_cubic_1d();
    if (spec.name == "convex_gradient") return make_convex_gradient(spec.d);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("problem '") + spec.name + "': " + e.what());
  }
  throw Error(ErrorCode::kConfig, "unknown problem '" + spec.name + "'");
}

}  // namespace monoflow
