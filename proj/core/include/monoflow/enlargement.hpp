#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "monoflow/operator.hpp"

namespace monoflow {

// A point of graph(A): v_witness ∈ A x_witness.
struct Witness {
  Vector x;
  Vector v;
};

struct EnlargementReport {
  bool passed = true;
  // min over witnesses of <x - x~, v - v~>; +inf with no witnesses.
  double min_inner_product = 0;
  // min_inner_product + eps; negative margins beyond tolerance fail.
  double worst_margin = 0;
  int witnesses = 0;
};

// Graph points sampled from dom(A), including boundary points paired with
// random normal-cone elements. Deterministic for a given seed.
std::vector<Witness> sample_witnesses(const OperatorSpec& op, const Vector& center, double radius,
                                      int count, std::uint64_t seed);

// Falsifier for v ∈ A^eps(x): checks <x - x~, v - v~> >= -eps - tol on each
// witness. Passing is necessary, not sufficient, for membership.
EnlargementReport check_enlargement(const Vector& x, const Vector& v, double eps,
                                    std::span<const Witness> witnesses,
                                    double membership_tol = 1e-10);

EnlargementReport eps_enlargement_check(const OperatorSpec& op, const Vector& x, const Vector& v,
                                        double eps, int witness_count, std::uint64_t seed,
                                        double membership_tol = 1e-10);

}  // namespace monoflow
