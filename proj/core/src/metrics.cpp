#include "monoflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "monoflow/error.hpp"
#include "monoflow/inclusion_solver.hpp"

namespace monoflow {

namespace {

constexpr double kKktTol = 1e-8;
constexpr int kGapStarts = 16;
constexpr int kGapMaxIters = 50000;

// F(x) = M x + q for operators whose single-valued part is affine.
std::pair<Matrix, Vector> affine_form(const OperatorSpec& op) {
  const auto d = op.dim();
  Matrix m = Matrix::Zero(d, d);
  Vector q = Vector::Zero(d);
  if (const auto& a = op.affine()) {
    m += a->matrix;
    q += a->offset;
  }
  if (const auto& poly = op.poly1d()) {
    const auto& c = poly->coeffs;
    if (!c.empty()) q.array() += c[0];
    if (c.size() > 1) m.diagonal().array() += c[1];
  }
  return {m, q};
}

// sup_{z in C} <c, z> for a box or ball.
std::pair<double, Vector> support(const ConvexSet& set, const Vector& c) {
  if (const auto* box = std::get_if<Box>(&set)) {
    Vector z(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) z[i] = c[i] >= 0.0 ? box->upper[i] : box->lower[i];
    return {c.dot(z), z};
  }
  const auto& ball = std::get<Ball>(set);
  const double n = c.norm();
  Vector z = n > 0.0 ? Vector(ball.center + (ball.radius / n) * c) : ball.center;
  return {c.dot(z), z};
}

Vector set_center(const ConvexSet& set) {
  if (const auto* box = std::get_if<Box>(&set)) return 0.5 * (box->lower + box->upper);
  return std::get<Ball>(set).center;
}

}  // namespace

GapResult gap_detailed(const ProblemInstance& problem, const Vector& x) {
  const auto& op = problem.op;
  if (!op.domain_bounded()) throw Error(ErrorCode::kDomainUnbounded, "gap needs a bounded domain");
  if (!op.is_affine()) throw Error(ErrorCode::kUnsupported, "gap is only implemented for affine F");
  if (x.size() != op.dim()) throw Error(ErrorCode::kDimensionMismatch, "gap: dimension mismatch");
  if (domain_distance(op, x) > 1e-9 * std::max(1.0, x.norm())) {
    throw Error(ErrorCode::kNotInDomain, "gap is +inf outside dom(A)");
  }

  const auto [m, q] = affine_form(op);
  const Matrix sym = 0.5 * (m + m.transpose());
  // <M z + q, x - z> = q.x + <M^T x - q, z> - z^T S z
  const Vector c = m.transpose() * x - q;
  const double base = q.dot(x);
  const ConvexSet& set = op.domain();

  GapResult out;
  const double sym_norm = sym.norm();
  if (sym_norm <= 1e-14 * std::max(1.0, m.norm())) {
    auto [value, z] = support(set, c);
    out.value = base + value;
    out.maximizer = std::move(z);
    out.kkt_residual = 0.0;
    return out;
  }

  auto objective = [&](const Vector& z) { return c.dot(z) - z.dot(sym * z); };
  auto grad = [&](const Vector& z) -> Vector { return c - 2.0 * (sym * z); };
  auto kkt = [&](const Vector& z) { return (z - project(set, z + grad(z))).norm(); };
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step = 1.0 / (2.0 * std::max(lmax, 1e-300));

  std::mt19937_64 rng(0x9a9ULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Vector center = set_center(set);
  const double radius = std::holds_alternative<Ball>(set)
                            ? std::get<Ball>(set).radius
                            : 0.5 * (std::get<Box>(set).upper - std::get<Box>(set).lower).maxCoeff();

  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < kGapStarts; ++s) {
    Vector z;
    if (s == 0) {
      z = center;
    } else if (s == 1) {
      z = project(set, x);
    } else {
      Vector r(x.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = unit(rng);
      z = project(set, center + radius * r);
    }
    // Accelerated projected gradient ascent with adaptive restart.
    Vector y = z;
    double t = 1.0;
    double f_prev = objective(z);
    for (int it = 0; it < kGapMaxIters; ++it) {
      const Vector z_next = project(set, y + step * grad(y));
      const double f_next = objective(z_next);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      if (f_next < f_prev) {
        if (y == z) break;  // plain projected step no longer ascends
        y = z;
        t = 1.0;
        continue;
      }
      y = z_next + ((t - 1.0) / t_next) * (z_next - z);
      z = z_next;
      t = t_next;
      f_prev = f_next;
      if (kkt(z) <= 1e-13 * std::max(1.0, c.norm())) break;
    }
    const double value = objective(z);
    if (value > best) {
      best = value;
      out.maximizer = z;
      out.kkt_residual = kkt(z);
    }
  }
  // Active-set polish: on the face picked out by the current point, solve the
  // reduced stationarity system exactly. FISTA alone crawls along directions
  // where sym(M) is nearly singular.
  if (const auto* box = std::get_if<Box>(&set); box && out.kkt_residual > 1e-13) {
    Vector z = out.maximizer;
    for (int round = 0; round < 20 && out.kkt_residual > 1e-13; ++round) {
      const Vector g = grad(z);
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const bool at_lo = z[i] <= box->lower[i] + 1e-9 && g[i] <= 0.0;
        const bool at_hi = z[i] >= box->upper[i] - 1e-9 && g[i] >= 0.0;
        if (at_lo) z[i] = box->lower[i];
        if (at_hi) z[i] = box->upper[i];
        if (!at_lo && !at_hi) free.push_back(i);
      }
      if (!free.empty()) {
        const auto nf = static_cast<Eigen::Index>(free.size());
        Matrix sff(nf, nf);
        Vector rhs(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
          rhs[a] = c[free[a]];
          for (Eigen::Index i = 0; i < z.size(); ++i) {
            if (std::find(free.begin(), free.end(), i) == free.end()) rhs[a] -= 2.0 * sym(free[a], i) * z[i];
          }
          for (Eigen::Index b = 0; b < nf; ++b) sff(a, b) = 2.0 * sym(free[a], free[b]);
        }
        const Vector zf = sff.completeOrthogonalDecomposition().solve(rhs);
        for (Eigen::Index a = 0; a < nf; ++a) z[free[a]] = zf[a];
      }
      z = project(set, z);
      const double k = kkt(z);
      if (k < out.kkt_residual && objective(z) >= best - 1e-12 * std::max(1.0, std::abs(best))) {
        out.kkt_residual = k;
        out.maximizer = z;
        best = std::max(best, objective(z));
      } else {
        break;
      }
    }
  }
  if (out.kkt_residual > kKktTol) {
    throw Error(ErrorCode::kInnerNonconverged,
                "gap maximization KKT residual " + std::to_string(out.kkt_residual));
  }
  out.value = base + best;
  return out;
}

double gap(const ProblemInstance& problem, const Vector& x) { return gap_detailed(problem, x).value; }

double residue(const ProblemInstance& problem, const Vector& x) {
  const double r = min_norm_residual(problem.op, x);
  if (!std::isfinite(r)) throw Error(ErrorCode::kNotInDomain, "residue is undefined outside dom(A)");
  return r;
}

double lyapunov(const Vector& x, const Vector& z) {
  if (x.size() != z.size()) throw Error(ErrorCode::kDimensionMismatch, "lyapunov: dimension mismatch");
  return 0.5 * (x - z).squaredNorm();
}

Vector nearest_solution(const ProblemInstance& problem, const Vector& x) {
  if (const auto* s = std::get_if<SingletonSolution>(&problem.solution)) return s->point;
  if (const auto* a = std::get_if<AffineSolution>(&problem.solution)) {
    if (a->basis.cols() == 0) return a->point;
    Eigen::HouseholderQR<Matrix> qr(a->basis);
    const Matrix q = qr.householderQ() * Matrix::Identity(a->basis.rows(), a->basis.cols());
    return a->point + q * (q.transpose() * (x - a->point));
  }
  throw Error(ErrorCode::kUnknownSolution, "problem '" + problem.name + "' has no known solution set");
}

double dist_to_solutions(const ProblemInstance& problem, const Vector& x) {
  return (x - nearest_solution(problem, x)).norm();
}

namespace {

RateFit fit_line(std::span<const std::pair<double, double>> series, double tail_fraction, bool log_index) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tail_fraction must lie in (0, 1]");
  }
  const auto n = series.size();
  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
  const auto first = n - std::min(n, tail);

  RateFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = first; i < n; ++i) {
    const auto [idx, value] = series[i];
    if (!(value > kRateValueFloor) || !std::isfinite(value)) {
      ++fit.dropped;
      continue;
    }
    if (log_index && !(idx > 0.0)) {
      ++fit.dropped;
      continue;
    }
    xs.push_back(log_index ? std::log(idx) : idx);
    ys.push_back(std::log(value));
    if (fit.points == 0) fit.index_min = idx;
    fit.index_max = idx;
    ++fit.points;
  }
  if (fit.points < 10) {
    throw Error(ErrorCode::kInsufficientPoints,
                "rate fit needs >= 10 positive points, got " + std::to_string(fit.points));
  }
  const double count = static_cast<double>(fit.points);
  double mx = 0, my = 0;
  for (int i = 0; i < fit.points; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < fit.points; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kInsufficientPoints, "rate fit needs distinct indices");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < fit.points; ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace

RateFit fit_rate(std::span<const std::pair<double, double>> series, double tail_fraction) {
  return fit_line(series, tail_fraction, true);
}

RateFit fit_exponential(std::span<const std::pair<double, double>> series, double tail_fraction) {
  return fit_line(series, tail_fraction, false);
}

}  // namespace monoflow
