#include "monoflow/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "monoflow/error.hpp"

namespace monoflow {

namespace {

constexpr double kMonotoneTol = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

bool all_finite(const Vector& v) { return v.allFinite(); }

int set_dim(const ConvexSet& set) {
  return std::visit(Overloaded{
                        [](std::monostate) { return -1; },
                        [](const Box& b) { return static_cast<int>(b.lower.size()); },
                        [](const Ball& b) { return static_cast<int>(b.center.size()); },
                    },
                    set);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void validate_polynomial(const Polynomial& poly) {
  for (double c : poly.coeffs) require(std::isfinite(c), ErrorCode::kInvalidArgument, "non-finite polynomial coefficient");
  const int n = poly.degree();
  if (n <= 0) return;
  const double lead = poly.coeffs[static_cast<std::size_t>(n)];
  if (n == 1) {
    require(lead >= 0.0, ErrorCode::kNotMonotone, "linear poly1d term must have nonnegative slope");
    return;
  }
  // The derivative has degree n - 1; it is bounded below only if that degree
  // is even with a positive leading coefficient.
  require(n % 2 == 1, ErrorCode::kNotMonotone, "poly1d must have odd degree");
  require(lead > 0.0, ErrorCode::kNotMonotone, "poly1d leading coefficient must be positive");

  // Cauchy bound on the real roots of the derivative, then dense sampling.
  double bound = 0.0;
  for (int k = 1; k < n; ++k) {
    bound = std::max(bound, std::abs(k * poly.coeffs[static_cast<std::size_t>(k)]) / (n * lead));
  }
  const double radius = 1.0 + bound;
  constexpr int kSamples = 4001;
  double scale = 0.0;
  for (double c : poly.coeffs) scale = std::max(scale, std::abs(c));
  for (int i = 0; i < kSamples; ++i) {
    const double u = -radius + 2.0 * radius * i / (kSamples - 1);
    require(poly.derivative(u) >= -kMonotoneTol * std::max(1.0, scale), ErrorCode::kNotMonotone,
            "poly1d derivative is negative at u = " + std::to_string(u));
  }
}

}  // namespace

int Polynomial::degree() const {
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k) {
    if (coeffs[static_cast<std::size_t>(k)] != 0.0) return k;
  }
  return -1;
}

double Polynomial::value(double u) const { return derivative(u, 0); }

double Polynomial::derivative(double u, int k) const {
  // Horner on the k-th derivative coefficients.
  double acc = 0.0;
  for (int j = static_cast<int>(coeffs.size()) - 1; j >= k; --j) {
    double falling = 1.0;
    for (int m = 0; m < k; ++m) falling *= (j - m);
    acc = acc * u + falling * coeffs[static_cast<std::size_t>(j)];
  }
  return acc;
}

OperatorSpec::OperatorSpec(OperatorParts parts) : parts_(std::move(parts)) {
  const bool has_domain = !std::holds_alternative<std::monostate>(parts_.domain);
  require(parts_.affine || has_domain || parts_.poly1d || parts_.norm_cubic,
          ErrorCode::kInvalidArgument, "operator needs at least one part");

  int d = -1;
  auto claim = [&d](int candidate, const char* what) {
    if (candidate < 0) return;
    require(d < 0 || d == candidate, ErrorCode::kDimensionMismatch,
            std::string("inconsistent dimension from ") + what);
    d = candidate;
  };
  if (parts_.affine) claim(static_cast<int>(parts_.affine->matrix.rows()), "affine");
  claim(set_dim(parts_.domain), "domain");
  if (parts_.dim) claim(*parts_.dim, "dim");
  require(d > 0, ErrorCode::kInvalidArgument, "operator dimension is undetermined");
  dim_ = d;

  if (parts_.affine) {
    const auto& a = *parts_.affine;
    require(a.matrix.rows() == d && a.matrix.cols() == d && a.offset.size() == d,
            ErrorCode::kDimensionMismatch, "affine part must be d x d with offset of size d");
    require(a.matrix.allFinite() && all_finite(a.offset), ErrorCode::kInvalidArgument,
            "affine part has non-finite entries");
    const Matrix sym = 0.5 * (a.matrix + a.matrix.transpose());
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    require(min_eig >= -kMonotoneTol * std::max(1.0, a.matrix.norm()), ErrorCode::kNotMonotone,
            "symmetric part of M has eigenvalue " + std::to_string(min_eig));
  }
  if (parts_.poly1d) validate_polynomial(*parts_.poly1d);
  if (parts_.norm_cubic) {
    require(std::isfinite(*parts_.norm_cubic) && *parts_.norm_cubic >= 0.0, ErrorCode::kNotMonotone,
            "norm_cubic coefficient must be nonnegative");
  }
  std::visit(Overloaded{
                 [](std::monostate) {},
                 [](const Box& b) {
                   require(b.lower.size() == b.upper.size(), ErrorCode::kDimensionMismatch,
                           "box bounds differ in size");
                   require(all_finite(b.lower) && all_finite(b.upper), ErrorCode::kInvalidArgument,
                           "box bounds must be finite");
                   require((b.lower.array() <= b.upper.array()).all(), ErrorCode::kInvalidArgument,
                           "box lower bound exceeds upper bound");
                 },
                 [](const Ball& b) {
                   require(all_finite(b.center) && std::isfinite(b.radius) && b.radius > 0.0,
                           ErrorCode::kInvalidArgument, "ball needs finite center and positive radius");
                 },
             },
             parts_.domain);
  require(parts_.smoothness.order >= 1, ErrorCode::kInvalidArgument, "smoothness order must be >= 1");
  require(std::isfinite(parts_.smoothness.lipschitz) && parts_.smoothness.lipschitz >= 0.0,
          ErrorCode::kInvalidArgument, "lipschitz constant must be nonnegative");
}

bool OperatorSpec::has_single_valued() const {
  return parts_.affine.has_value() || parts_.poly1d.has_value() || parts_.norm_cubic.has_value();
}

bool OperatorSpec::has_normal_cone() const {
  return !std::holds_alternative<std::monostate>(parts_.domain);
}

bool OperatorSpec::domain_bounded() const { return has_normal_cone(); }

bool OperatorSpec::is_affine() const {
  const bool poly_linear = !parts_.poly1d || parts_.poly1d->degree() <= 1;
  const bool no_cubic = !parts_.norm_cubic || *parts_.norm_cubic == 0.0;
  return poly_linear && no_cubic;
}

Vector evaluate_single_valued(const OperatorSpec& op, const Vector& x) {
  require(x.size() == op.dim(), ErrorCode::kDimensionMismatch,
          "point has dimension " + std::to_string(x.size()) + ", operator " + std::to_string(op.dim()));
  Vector out = Vector::Zero(op.dim());
  if (const auto& a = op.affine()) out += a->matrix * x + a->offset;
  if (const auto& poly = op.poly1d()) {
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] += poly->value(x[i]);
  }
  if (const auto& c = op.norm_cubic()) out += (*c * x.squaredNorm()) * x;
  return out;
}

Matrix jacobian(const OperatorSpec& op, const Vector& x) {
  require(x.size() == op.dim(), ErrorCode::kDimensionMismatch, "jacobian: dimension mismatch");
  Matrix jac = Matrix::Zero(op.dim(), op.dim());
  if (const auto& a = op.affine()) jac += a->matrix;
  if (const auto& poly = op.poly1d()) {
    for (Eigen::Index i = 0; i < x.size(); ++i) jac(i, i) += poly->derivative(x[i]);
  }
  if (const auto& c = op.norm_cubic()) {
    jac += *c * (x.squaredNorm() * Matrix::Identity(op.dim(), op.dim()) + 2.0 * x * x.transpose());
  }
  return jac;
}

Vector project_domain(const OperatorSpec& op, const Vector& x) {
  require(x.size() == op.dim(), ErrorCode::kDimensionMismatch, "project_domain: dimension mismatch");
  return std::visit(Overloaded{
                        [&](std::monostate) -> Vector { return x; },
                        [&](const Box& b) -> Vector { return x.cwiseMax(b.lower).cwiseMin(b.upper); },
                        [&](const Ball& b) -> Vector {
                          const Vector offset = x - b.center;
                          const double r = offset.norm();
                          if (r <= b.radius) return x;
                          return b.center + (b.radius / r) * offset;
                        },
                    },
                    op.domain());
}

double domain_distance(const OperatorSpec& op, const Vector& x) {
  return (x - project_domain(op, x)).norm();
}

namespace {

// min { ||f + n|| : n in N_C(x) } for a fixed vector f.
double shifted_residual(const OperatorSpec& op, const Vector& x, const Vector& f, double tol) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  return std::visit(
      Overloaded{
          [&](std::monostate) { return f.norm(); },
          [&](const Box& b) {
            double sq = 0.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              const double slack_lo = tol * std::max(1.0, std::abs(b.lower[i]));
              const double slack_hi = tol * std::max(1.0, std::abs(b.upper[i]));
              if (x[i] < b.lower[i] - slack_lo || x[i] > b.upper[i] + slack_hi) return kInf;
              const bool at_lo = x[i] <= b.lower[i] + slack_lo;
              const bool at_hi = x[i] >= b.upper[i] - slack_hi;
              double comp = std::abs(f[i]);
              if (at_lo && at_hi) {
                comp = 0.0;
              } else if (at_hi) {
                // normal cone component n >= 0
                comp = std::max(f[i], 0.0);
              } else if (at_lo) {
                comp = std::max(-f[i], 0.0);
              }
              sq += comp * comp;
            }
            return std::sqrt(sq);
          },
          [&](const Ball& b) {
            const Vector offset = x - b.center;
            const double r = offset.norm();
            const double slack = tol * std::max(1.0, b.radius);
            if (r > b.radius + slack) return kInf;
            if (r < b.radius - slack) return f.norm();
            const Vector u = offset / r;
            const double t = std::max(0.0, -f.dot(u));
            return (f + t * u).norm();
          },
      },
      op.domain());
}

}  // namespace

double min_norm_residual(const OperatorSpec& op, const Vector& x, double tol) {
  return shifted_residual(op, x, evaluate_single_valued(op, x), tol);
}

double membership_violation(const OperatorSpec& op, const Vector& y, const Vector& v, double tol) {
  if (y.size() != op.dim() || v.size() != op.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "membership_violation: dimension mismatch");
  }
  return shifted_residual(op, y, evaluate_single_valued(op, y) - v, tol);
}

namespace {

// Order-j homogeneous term of the Taylor expansion of F at `a` in direction h,
// i.e. D^j F(a)[h]^j / j!.
Vector taylor_term(const OperatorSpec& op, const Vector& a, const Vector& h, int j) {
  Vector out = Vector::Zero(op.dim());
  if (const auto& aff = op.affine()) {
    if (j == 0) out += aff->matrix * a + aff->offset;
    if (j == 1) out += aff->matrix * h;
  }
  if (const auto& poly = op.poly1d()) {
    const double inv_fact = 1.0 / factorial(j);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      out[i] += poly->derivative(a[i], j) * inv_fact * std::pow(h[i], j);
    }
  }
  if (const auto& c = op.norm_cubic()) {
    const double aa = a.squaredNorm();
    const double ah = a.dot(h);
    const double hh = h.squaredNorm();
    switch (j) {
      case 0: out += *c * aa * a; break;
      case 1: out += *c * (aa * h + 2.0 * ah * a); break;
      case 2: out += *c * (2.0 * ah * h + hh * a); break;
      case 3: out += *c * hh * h; break;
      default: break;
    }
  }
  return out;
}

Matrix taylor_term_jacobian(const OperatorSpec& op, const Vector& a, const Vector& h, int j) {
  const auto d = op.dim();
  Matrix out = Matrix::Zero(d, d);
  if (j == 0) return out;
  if (const auto& aff = op.affine(); aff && j == 1) out += aff->matrix;
  if (const auto& poly = op.poly1d()) {
    const double inv_fact = 1.0 / factorial(j - 1);
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, i) += poly->derivative(a[i], j) * inv_fact * std::pow(h[i], j - 1);
    }
  }
  if (const auto& c = op.norm_cubic()) {
    const Matrix eye = Matrix::Identity(d, d);
    switch (j) {
      case 1: out += *c * (a.squaredNorm() * eye + 2.0 * a * a.transpose()); break;
      case 2: out += *c * (2.0 * h * a.transpose() + 2.0 * a.dot(h) * eye + 2.0 * a * h.transpose()); break;
      case 3: out += *c * (h.squaredNorm() * eye + 2.0 * h * h.transpose()); break;
      default: break;
    }
  }
  return out;
}

}  // namespace

Vector taylor_surrogate(const OperatorSpec& op, const Vector& anchor, int p, const Vector& u) {
  require(p >= 1, ErrorCode::kInvalidArgument, "taylor order p must be >= 1");
  require(anchor.size() == op.dim() && u.size() == op.dim(), ErrorCode::kDimensionMismatch,
          "taylor_surrogate: dimension mismatch");
  const Vector h = u - anchor;
  Vector out = Vector::Zero(op.dim());
  for (int j = 0; j <= std::max(0, p - 1); ++j) out += taylor_term(op, anchor, h, j);
  return out;
}

Matrix taylor_surrogate_jacobian(const OperatorSpec& op, const Vector& anchor, int p, const Vector& u) {
  require(p >= 1, ErrorCode::kInvalidArgument, "taylor order p must be >= 1");
  require(anchor.size() == op.dim() && u.size() == op.dim(), ErrorCode::kDimensionMismatch,
          "taylor_surrogate_jacobian: dimension mismatch");
  const Vector h = u - anchor;
  Matrix out = Matrix::Zero(op.dim(), op.dim());
  for (int j = 1; j <= p - 1; ++j) out += taylor_term_jacobian(op, anchor, h, j);
  return out;
}

}  // namespace monoflow
