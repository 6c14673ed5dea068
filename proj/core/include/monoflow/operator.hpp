#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace monoflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// x -> M x + q
struct AffinePart {
  Matrix matrix;
  Vector offset;
};

// Coordinatewise scalar polynomial c[0] + c[1] u + c[2] u^2 + ...
struct Polynomial {
  std::vector<double> coeffs;

  int degree() const;
  double value(double u) const;
  // k-th derivative at u.
  double derivative(double u, int k = 1) const;
};

struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

// Closed convex set whose normal cone forms the set-valued part H of A.
// std::monostate means H is absent and dom(A) is all of R^d.
using ConvexSet = std::variant<std::monostate, Box, Ball>;

struct Smoothness {
  int order = 1;            // p
  double lipschitz = 0.0;   // L for D^(p-1) F
};

// Raw description consumed by OperatorSpec; validated on construction.
struct OperatorParts {
  std::optional<AffinePart> affine;
  ConvexSet domain;
  std::optional<Polynomial> poly1d;
  // F(x) = c ||x||^2 x, the gradient of (c/4) ||x||^4.
  std::optional<double> norm_cubic;
  Smoothness smoothness;
  // Required only when no other part fixes the dimension.
  std::optional<int> dim;
};

// A maximal monotone operator A = F + N_C with
//   F(x) = M x + q + poly(x) + c ||x||^2 x
// and C a box, ball or all of R^d. Immutable once constructed.
class OperatorSpec {
 public:
  // Throws Error(kNotMonotone) if (M + M^T)/2 has an eigenvalue below -1e-10
  // or the polynomial derivative is negative somewhere on R, and
  // Error(kInvalidArgument) on inconsistent parts.
  explicit OperatorSpec(OperatorParts parts);

  int dim() const { return dim_; }

  const std::optional<AffinePart>& affine() const { return parts_.affine; }
  const ConvexSet& domain() const { return parts_.domain; }
  const std::optional<Polynomial>& poly1d() const { return parts_.poly1d; }
  const std::optional<double>& norm_cubic() const { return parts_.norm_cubic; }
  const Smoothness& smoothness() const { return parts_.smoothness; }
  const OperatorParts& parts() const { return parts_; }

  bool has_single_valued() const;
  bool has_normal_cone() const;
  bool domain_bounded() const;
  // F is affine (no polynomial / norm-cubic terms).
  bool is_affine() const;

 private:
  OperatorParts parts_;
  int dim_ = 0;
};

// F(x), the single-valued part of A; zero when A is a pure normal cone.
Vector evaluate_single_valued(const OperatorSpec& op, const Vector& x);

// DF(x).
Matrix jacobian(const OperatorSpec& op, const Vector& x);

// Euclidean projection onto dom(A).
Vector project_domain(const OperatorSpec& op, const Vector& x);

// dist(x, dom(A)).
double domain_distance(const OperatorSpec& op, const Vector& x);

// min { ||F(x) + n|| : n in N_C(x) }. Points within `tol` of the domain are
// treated as lying on it; points farther away give +infinity (Ax is empty).
double min_norm_residual(const OperatorSpec& op, const Vector& x, double tol = 1e-9);

// dist(v, A y) with the same boundary convention; +infinity off the domain.
double membership_violation(const OperatorSpec& op, const Vector& y, const Vector& v, double tol = 1e-9);

// Taylor model of F of order p - 1 around `anchor`, evaluated at u.
// p = 1 freezes F(anchor).
Vector taylor_surrogate(const OperatorSpec& op, const Vector& anchor, int p, const Vector& u);

// Jacobian of u -> taylor_surrogate(op, anchor, p, u).
Matrix taylor_surrogate_jacobian(const OperatorSpec& op, const Vector& anchor, int p,
                                 const Vector& u);

}  // namespace monoflow
