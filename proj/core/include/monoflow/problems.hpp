#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monoflow/operator.hpp"

namespace monoflow {

struct UnknownSolution {};
struct SingletonSolution {
  Vector point;
};
// point + span(basis columns)
struct AffineSolution {
  Vector point;
  Matrix basis;
};
using SolutionSet = std::variant<UnknownSolution, SingletonSolution, AffineSolution>;

// dist(x, A^{-1}(0)) <= kappa * res(x) whenever res(x) <= delta.
struct ErrorBound {
  double kappa = 1.0;
  double delta = 1.0;
};

struct ProblemInstance {
  std::string name;
  OperatorSpec op;
  SolutionSet solution;
  std::optional<ErrorBound> error_bound;
  int order_p = 1;
  double lipschitz = 0.0;

  bool domain_bounded() const { return op.domain_bounded(); }
  bool solution_known() const { return !std::holds_alternative<UnknownSolution>(solution); }
};

inline constexpr std::uint64_t kDefaultProblemSeed = 0x5eedULL;

// F(u, w) = (B w, -B^T u), B = scale * I on R^(d/2), over the box [-1, 1]^d.
ProblemInstance make_bilinear_saddle(int d, double scale = 1.0);

// F(x) = (mu I + S) x on R^d with S a seeded random skew matrix.
ProblemInstance make_strongly_monotone_affine(int d, double mu, double skew_scale = 1.0,
                                              std::uint64_t seed = kDefaultProblemSeed);

// F(x) = x^3 on R.
ProblemInstance make_cubic_1d();

// F(x) = ||x||^2 x = grad of ||x||^4 / 4 on R^d.
ProblemInstance make_convex_gradient(int d);

// Name-addressable constructor parameters, as used by experiment configs.
struct ProblemSpec {
  std::string name = "bilinear_saddle";
  int d = 2;
  double scale = 1.0;
  double mu = 1.0;
  double skew_scale = 1.0;
  std::uint64_t seed = kDefaultProblemSeed;

  bool operator==(const ProblemSpec&) const = default;
};

// Known names: bilinear_saddle, strongly_monotone_affine, cubic_1d,
// convex_gradient. Throws Error(kConfig) otherwise.
ProblemInstance make_problem(const ProblemSpec& spec);
std::vector<std::string> problem_names();

}  // namespace monoflow
