#include "monoflow/enlargement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "monoflow/error.hpp"

namespace monoflow {

std::vector<Witness> sample_witnesses(const OperatorSpec& op, const Vector& center, double radius,
                                      int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(0.0, 2.0);
  const auto d = op.dim();
  auto random_vec = [&] {
    Vector r(d);
    for (Eigen::Index i = 0; i < d; ++i) r[i] = unit(rng);
    return r;
  };

  std::vector<Witness> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    Witness w;
    Vector normal = Vector::Zero(d);
    const bool on_boundary = (k % 3 == 2);
    if (const auto* box = std::get_if<Box>(&op.domain())) {
      w.x = box->lower + ((random_vec().array() + 1.0) * 0.5 * (box->upper - box->lower).array()).matrix();
      if (on_boundary) {
        const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(d));
        const bool upper = (rng() & 1U) != 0U;
        w.x[i] = upper ? box->upper[i] : box->lower[i];
        normal[i] = (upper ? 1.0 : -1.0) * mag(rng);
      }
    } else if (const auto* ball = std::get_if<Ball>(&op.domain())) {
      Vector dir = random_vec();
      if (dir.norm() == 0.0) dir[0] = 1.0;
      dir.normalize();
      const double r = on_boundary ? ball->radius : ball->radius * std::pow((unit(rng) + 1.0) * 0.5, 1.0 / static_cast<double>(d));
      w.x = ball->center + r * dir;
      if (on_boundary) normal = mag(rng) * dir;
    } else {
      w.x = center + radius * random_vec();
    }
    w.v = evaluate_single_valued(op, w.x) + normal;
    out.push_back(std::move(w));
  }
  return out;
}

EnlargementReport check_enlargement(const Vector& x, const Vector& v, double eps,
                                    std::span<const Witness> witnesses, double membership_tol) {
  if (eps < 0.0) throw Error(ErrorCode::kInvalidArgument, "eps must be nonnegative");
  EnlargementReport rep;
  rep.min_inner_product = std::numeric_limits<double>::infinity();
  for (const auto& w : witnesses) {
    const Vector dx = x - w.x;
    const Vector dv = v - w.v;
    const double ip = dx.dot(dv);
    rep.min_inner_product = std::min(rep.min_inner_product, ip);
    const double tol = membership_tol * std::max(1.0, dx.norm() * dv.norm());
    if (ip < -eps - tol) rep.passed = false;
    ++rep.witnesses;
  }
  rep.worst_margin = rep.min_inner_product + eps;
  return rep;
}

EnlargementReport eps_enlargement_check(const OperatorSpec& op, const Vector& x, const Vector& v,
                                        double eps, int witness_count, std::uint64_t seed,
                                        double membership_tol) {
  const double radius = 1.0 + x.norm() + v.norm();
  const auto witnesses = sample_witnesses(op, x, radius, witness_count, seed);
  return check_enlargement(x, v, eps, witnesses, membership_tol);
}

}  // namespace monoflow
