#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "monoflow/problems.hpp"

namespace monoflow {

struct GapResult {
  double value = 0;
  Vector maximizer;          // z attaining the inner supremum
  double kkt_residual = 0;   // ||z - P_C(z + grad)|| at the maximizer
};

// gap(x) = sup_{z in dom A} sup_{xi in Az} <xi, x - z> for affine F over a box
// or ball. For x in dom(A) the normal-cone part of the inner supremum is
// nonpositive and drops out; the remaining concave quadratic is maximized
// exactly (corner/support formula when F is skew, multi-start projected
// gradient certified by KKT otherwise).
// Errors: kDomainUnbounded, kNotInDomain, kUnsupported (non-affine F).
GapResult gap_detailed(const ProblemInstance& problem, const Vector& x);
double gap(const ProblemInstance& problem, const Vector& x);

// res(x) = inf_{xi in Ax} ||xi||. Error kNotInDomain outside dom(A).
double residue(const ProblemInstance& problem, const Vector& x);

// 0.5 ||x - z||^2
double lyapunov(const Vector& x, const Vector& z);

// Nearest point of the known solution set. Error kUnknownSolution.
Vector nearest_solution(const ProblemInstance& problem, const Vector& x);
double dist_to_solutions(const ProblemInstance& problem, const Vector& x);

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  double index_min = 0;
  double index_max = 0;
  int points = 0;   // used in the fit
  int dropped = 0;  // tail values at or below the floating-point floor
};

using Series = std::vector<std::pair<double, double>>;

inline constexpr double kRateValueFloor = 1e-14;

// Least-squares line through (log index, log value) over the last
// tail_fraction of the series. Needs >= 10 usable points (kInsufficientPoints).
RateFit fit_rate(std::span<const std::pair<double, double>> series, double tail_fraction);

// Same tail selection, but fits (index, log value): slope is the exponential rate.
RateFit fit_exponential(std::span<const std::pair<double, double>> series, double tail_fraction);

}  // namespace monoflow
