#include "monoflow_app/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <string>
#include <thread>

#include "monoflow/enlargement.hpp"
#include "monoflow/error.hpp"
#include "monoflow/feedback.hpp"
#include "monoflow/flow.hpp"
#include "monoflow/hpe.hpp"
#include "monoflow/metrics.hpp"
#include "monoflow/problems.hpp"
#include "monoflow/resolvent.hpp"
#include "monoflow/tensor.hpp"

namespace monoflow::app {

bool SuiteResult::passed() const {
  return error.empty() && std::all_of(items.begin(), items.end(), [](const InvariantResult& r) { return r.passed; });
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(uniform(rng, std::log(lo), std::log(hi))); }

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Vector random_vector(Rng& rng, Eigen::Index d, double scale) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = uniform(rng, -scale, scale);
  return v;
}

Matrix random_monotone_matrix(Rng& rng, int d) {
  Matrix g(d, d), h(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      g(i, j) = uniform(rng, -1.0, 1.0);
      h(i, j) = uniform(rng, -1.0, 1.0);
    }
  }
  return uniform(rng, 0.0, 0.5) * (g * g.transpose()) + (h - h.transpose());
}

Box unit_box(int d, double half) { return Box{Vector::Constant(d, -half), Vector::Constant(d, half)}; }

// A mix of affine, box/ball-constrained, coordinatewise polynomial and
// norm-cubic operators in dimension 1..4.
OperatorSpec random_operator(Rng& rng) {
  const int d = pick(rng, 1, 4);
  OperatorParts parts;
  switch (pick(rng, 0, 4)) {
    case 0:
      parts.affine = AffinePart{random_monotone_matrix(rng, d), random_vector(rng, d, 1.0)};
      break;
    case 1:
      parts.affine = AffinePart{random_monotone_matrix(rng, d), random_vector(rng, d, 1.0)};
      parts.domain = unit_box(d, 1.0);
      break;
    case 2:
      parts.poly1d = Polynomial{{uniform(rng, -0.5, 0.5), uniform(rng, 0.0, 1.0), 0.0, uniform(rng, 0.1, 1.0)}};
      parts.dim = d;
      if (pick(rng, 0, 1) == 1) parts.domain = unit_box(d, 0.8);
      break;
    case 3:
      parts.affine = AffinePart{random_monotone_matrix(rng, d), Vector::Zero(d)};
      parts.norm_cubic = uniform(rng, 0.2, 1.0);
      break;
    default:
      parts.affine = AffinePart{random_monotone_matrix(rng, d), random_vector(rng, d, 1.0)};
      parts.domain = Ball{Vector::Zero(d), 1.5};
      break;
  }
  return OperatorSpec(std::move(parts));
}

OperatorSpec identity_operator(int d) {
  OperatorParts parts;
  parts.affine = AffinePart{Matrix::Identity(d, d), Vector::Zero(d)};
  return OperatorSpec(std::move(parts));
}

ProblemInstance identity_problem(int d) {
  return ProblemInstance{"identity", identity_operator(d), SingletonSolution{Vector::Zero(d)}, ErrorBound{1.0, 1e300}, 1,
                         1.0};
}

// The shipped zoo at small sizes.
std::vector<ProblemInstance> zoo() {
  return {make_bilinear_saddle(4), make_strongly_monotone_affine(4, 1.0), make_cubic_1d(), make_convex_gradient(3)};
}

InvariantResult failed(const std::string& name, const std::string& why) {
  InvariantResult r(name);
  r.passed = false;
  r.note = why;
  return r;
}

// Runs `body`; an escaped Error turns into a failed item carrying its message.
void guarded(std::vector<InvariantResult>& items, const std::string& name,
             const std::function<void(InvariantResult&)>& body) {
  InvariantResult r(name);
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.note = e.what();
  }
  if (r.evaluated == 0 && r.passed) {
    r.passed = false;
    r.note = "nothing evaluated";
  }
  items.push_back(std::move(r));
}

void merge(std::vector<InvariantResult>& items, const std::string& prefix, const InvariantReport& rep) {
  for (auto r : rep.items) {
    r.name = prefix + "." + r.name;
    items.push_back(std::move(r));
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// ---------------------------------------------------------------- CORE

std::vector<InvariantResult> suite_core(Rng& rng) {
  std::vector<InvariantResult> items;

  guarded(items, "resolvent_nonexpansive", [&](InvariantResult& r) {
    for (int n = 0; n < 200; ++n) {
      const OperatorSpec op = random_operator(rng);
      const double lambda = log_uniform(rng, 1e-2, 1e2);
      const Vector x1 = random_vector(rng, op.dim(), 2.0), x2 = random_vector(rng, op.dim(), 2.0);
      const double lhs = (resolvent(op, lambda, x1).y - resolvent(op, lambda, x2).y).norm();
      const double rhs = (x1 - x2).norm() + 2e-10;
      r.observe(rhs - lhs, lhs <= rhs);
    }
  });

  guarded(items, "resolvent_certificate", [&](InvariantResult& r) {
    for (int n = 0; n < 200; ++n) {
      const OperatorSpec op = random_operator(rng);
      const double lambda = log_uniform(rng, 1e-2, 1e2);
      const Vector x = random_vector(rng, op.dim(), 2.0);
      const ResolventResult res = resolvent(op, lambda, x);
      // v = (x - y)/lambda by construction, so the check is v in A y.
      const double gap = lambda * membership_violation(op, res.y, res.v);
      const double tol = 1e-8 * std::max(1.0, x.norm());
      r.observe(tol - gap, gap <= tol);
    }
  });

  guarded(items, "taylor_remainder", [&](InvariantResult& r) {
    // Odd coordinatewise polynomials of degree deg in {3, 5}. At order p = deg,
    // D^(p-1) F is Lipschitz with L = p! c_p; at p = deg + 1 the model is exact.
    for (int n = 0; n < 200; ++n) {
      const int deg = pick(rng, 0, 1) == 0 ? 3 : 5;
      const int p = deg + pick(rng, 0, 1);
      std::vector<double> c(static_cast<std::size_t>(deg) + 1, 0.0);
      for (int i = 1; i <= deg; i += 2) c[i] = uniform(rng, 0.0, 1.0);
      c[0] = uniform(rng, -0.5, 0.5);
      const double fact = factorial(p);
      const double lipschitz = p == deg ? fact * c[deg] : 0.0;
      OperatorParts parts;
      parts.poly1d = Polynomial{c};
      parts.dim = pick(rng, 1, 3);
      const OperatorSpec op(std::move(parts));
      const Vector a = random_vector(rng, op.dim(), 1.5), u = random_vector(rng, op.dim(), 1.5);
      const double err = (evaluate_single_valued(op, u) - taylor_surrogate(op, a, p, u)).norm();
      // Coordinatewise remainder summed in l2 is bounded by the l2 norm bound
      // because sum |h_i|^(2p) <= (sum h_i^2)^p.
      const double bound = lipschitz / fact * std::pow((u - a).norm(), p);
      const double tol = 1e-10 * std::max(1.0, evaluate_single_valued(op, u).norm());
      r.observe(bound + tol - err, err <= bound + tol);
    }
  });

  guarded(items, "monotonicity_spot_check", [&](InvariantResult& r) {
    std::vector<OperatorSpec> ops;
    for (const auto& p : zoo()) ops.push_back(p.op);
    ops.push_back(make_bilinear_saddle(10, 3.0).op);
    ops.push_back(make_strongly_monotone_affine(8, 0.1, 5.0, 7).op);
    for (int n = 0; n < 20; ++n) ops.push_back(random_operator(rng));
    for (const auto& op : ops) {
      for (int n = 0; n < 50; ++n) {
        const Vector x1 = random_vector(rng, op.dim(), 2.0), x2 = random_vector(rng, op.dim(), 2.0);
        const double ip = (evaluate_single_valued(op, x1) - evaluate_single_valued(op, x2)).dot(x1 - x2);
        r.observe(ip + 1e-12, ip >= -1e-12);
      }
    }
  });

  guarded(items, "problems_solution_residue", [&](InvariantResult& r) {
    for (const auto& p : zoo()) {
      const double res = residue(p, nearest_solution(p, Vector::Zero(p.op.dim())));
      r.observe(1e-8 - res, res <= 1e-8);
    }
  });

  guarded(items, "problems_error_bound", [&](InvariantResult& r) {
    std::vector<ProblemInstance> probs = zoo();
    probs.push_back(make_bilinear_saddle(6, 2.5));
    probs.push_back(make_strongly_monotone_affine(5, 0.3, 2.0, 11));
    for (const auto& p : probs) {
      if (!p.error_bound) continue;
      const auto [kappa, delta] = *p.error_bound;
      for (int n = 0; n < 200; ++n) {
        const Vector z = nearest_solution(p, Vector::Zero(p.op.dim()));
        const Vector x = project_domain(p.op, z + random_vector(rng, p.op.dim(), log_uniform(rng, 1e-6, 1.0)));
        const double res = residue(p, x);
        if (res > delta) continue;
        const double dist = dist_to_solutions(p, x);
        const double cap = kappa * res * (1.0 + 1e-6) + 1e-15;
        r.observe(cap - dist, dist <= cap);
      }
    }
  });
  return items;
}

// ---------------------------------------------------------------- FEEDBACK

std::vector<InvariantResult> suite_feedback(Rng& rng) {
  std::vector<InvariantResult> items;

  guarded(items, "phi_sandwich", [&](InvariantResult& r) {
    while (r.evaluated < 100) {
      const OperatorSpec op = random_operator(rng);
      const Vector x = random_vector(rng, op.dim(), 2.0);
      if (min_norm_residual(op, x) <= 1e-6) continue;
      const int p = pick(rng, 2, 4);
      const double l1 = log_uniform(rng, 1e-3, 1e2);
      const double l2 = l1 * log_uniform(rng, 1.0, 1e3);
      const double f1 = phi(op, l1, x, p), f2 = phi(op, l2, x, p);
      const double q = p - 1.0;
      const double low = std::pow(l2 / l1, 1.0 / q) * f1;
      const double high = std::pow(l2 / l1, p / q) * f1;
      const double tol = 1e-9 * std::max(1.0, f2);
      const double margin = std::min(f2 - low, high - f2) / std::max(f2, 1e-300);
      r.observe(margin, f2 >= low - tol && f2 <= high + tol);
    }
  });

  guarded(items, "phi_lipschitz_x", [&](InvariantResult& r) {
    for (int n = 0; n < 200; ++n) {
      const OperatorSpec op = random_operator(rng);
      const int p = pick(rng, 2, 4);
      const double lambda = log_uniform(rng, 1e-2, 1e2);
      const Vector x1 = random_vector(rng, op.dim(), 2.0);
      const Vector x2 = x1 + random_vector(rng, op.dim(), log_uniform(rng, 1e-4, 1.0));
      const double lhs = std::abs(phi(op, lambda, x1, p) - phi(op, lambda, x2, p));
      const double rhs = std::pow(lambda, 1.0 / (p - 1)) * (x1 - x2).norm();
      const double tol = 1e-9 * std::max(1.0, rhs);
      r.observe(rhs + tol - lhs, lhs <= rhs + tol);
    }
  });

  guarded(items, "solve_lambda_consistency", [&](InvariantResult& r) {
    const FeedbackOptions opts;
    while (r.evaluated < 100) {
      const OperatorSpec op = random_operator(rng);
      const Vector x = random_vector(rng, op.dim(), 2.0);
      if (min_norm_residual(op, x) <= 1e-6) continue;
      const FeedbackParams params{uniform(rng, 0.05, 0.95), pick(rng, 2, 4), false};
      const double lambda = solve_lambda(op, x, params);
      const double value = phi(op, lambda, x, params.p);
      const double target = std::pow(params.theta, 1.0 / (params.p - 1));
      // Relative ae_tol on lambda g(lambda) gives at most ae_tol/(p-1) on phi.
      const double rel = std::abs(value - target) / target;
      r.observe(opts.ae_tol - rel, rel <= opts.ae_tol * (1.0 + 1e-6));
    }
  });

  guarded(items, "gamma_lipschitz", [&](InvariantResult& r) {
    int n = 0;
    while (r.evaluated < 1000) {
      const OperatorSpec op = random_operator(rng);
      for (int k = 0; k < 50 && r.evaluated < 1000; ++k, ++n) {
        const FeedbackParams params{uniform(rng, 0.05, 0.95), pick(rng, 2, 4), false};
        const Vector x1 = random_vector(rng, op.dim(), 2.0);
        const Vector x2 = x1 + random_vector(rng, op.dim(), log_uniform(rng, 1e-4, 1.0));
        const double lhs = std::abs(gamma(op, x1, params) - gamma(op, x2, params));
        const double constant = std::pow(params.theta, -1.0 / (params.p - 1));
        const double rhs = constant * (x1 - x2).norm();
        const double ratio = lhs / (x1 - x2).norm();
        r.observe(constant + 1e-6 - ratio, ratio <= constant + 1e-6 || lhs <= rhs + 1e-12);
      }
    }
    r.note = std::to_string(n) + " pairs";
  });
  return items;
}

// ---------------------------------------------------------------- FLOW

std::vector<InvariantResult> suite_flow(Rng& rng) {
  std::vector<InvariantResult> items;

  guarded(items, "identity_closed_form", [&](InvariantResult& r) {
    // x' = J x - x = -theta/(1+theta) x for A = I and p = 1.
    const ProblemInstance id = identity_problem(3);
    for (double theta : {0.1, 0.5, 0.9}) {
      const Vector x0 = random_vector(rng, 3, 1.0);
      const Trajectory traj = integrate(id, x0, FeedbackParams{theta, 1, false}, 1.0, 1e-3);
      const Vector exact = std::exp(-theta / (1.0 + theta)) * x0;
      const double err = (traj.samples.back().x - exact).norm();
      r.observe(1e-6 - err, err <= 1e-6 && traj.samples.back().t == 1.0);
    }
  });

  struct FlowCase {
    ProblemInstance problem;
    FeedbackParams params;
    double horizon;
  };
  std::vector<FlowCase> cases;
  cases.push_back({make_bilinear_saddle(4), {0.1, 1, false}, 20.0});
  cases.push_back({make_bilinear_saddle(4), {0.05, 2, false}, 20.0});
  cases.push_back({make_strongly_monotone_affine(4, 1.0), {0.5, 1, false}, 10.0});
  cases.push_back({make_strongly_monotone_affine(4, 1.0), {0.1, 2, false}, 10.0});
  cases.push_back({identity_problem(2), {0.5, 2, false}, 5.0});
  cases.push_back({make_cubic_1d(), {0.5, 2, false}, 10.0});
  cases.push_back({make_cubic_1d(), {0.5, 3, false}, 10.0});
  cases.push_back({make_convex_gradient(3), {0.3, 3, false}, 10.0});
  for (const auto& c : cases) {
    const std::string tag = c.problem.name + ".p" + std::to_string(c.params.p);
    try {
      Vector x0 = random_vector(rng, c.problem.op.dim(), 1.0);
      x0 = project_domain(c.problem.op, x0);
      const Trajectory traj = integrate(c.problem, x0, c.params, c.horizon, 0.01);
      merge(items, "flow." + tag, check_flow_invariants(traj, c.problem, c.params));
    } catch (const std::exception& e) {
      items.push_back(failed("flow." + tag, e.what()));
    }
  }
  return items;
}

// ---------------------------------------------------------------- HPE

std::vector<InvariantResult> suite_hpe(Rng& rng) {
  std::vector<InvariantResult> items;

  struct HpeCase {
    ProblemInstance problem;
    double theta;
    int p;
    int max_iters;
  };
  std::vector<HpeCase> cases;
  cases.push_back({make_bilinear_saddle(4), 0.1, 1, 10000});
  cases.push_back({make_bilinear_saddle(4), 1e-3, 2, 10000});
  cases.push_back({make_strongly_monotone_affine(4, 1.0), 0.5, 1, 2000});
  cases.push_back({make_strongly_monotone_affine(4, 1.0), 0.1, 2, 2000});
  cases.push_back({make_cubic_1d(), 0.5, 2, 2000});
  cases.push_back({make_cubic_1d(), 0.5, 3, 2000});
  cases.push_back({make_convex_gradient(3), 0.5, 3, 2000});
  for (const auto& c : cases) {
    const std::string tag = "exact." + c.problem.name + ".p" + std::to_string(c.p);
    try {
      HpeConfig cfg;
      cfg.theta = c.theta;
      cfg.p = c.p;
      cfg.max_iters = c.max_iters;
      const Vector x0 = project_domain(c.problem.op, random_vector(rng, c.problem.op.dim(), 1.0));
      const HpeRun result = run(c.problem, make_exact_oracle(c.problem, cfg), cfg, x0);
      merge(items, tag, check_discrete_lemmas(result.records, c.problem, cfg));
    } catch (const std::exception& e) {
      items.push_back(failed(tag, e.what()));
    }
  }

  guarded(items, "ppa_contraction", [&](InvariantResult& r) {
    // F = mu I, p = 1: x_{k+1} = x_k / (1 + theta mu) exactly.
    const double mu = 1.0, theta = 0.7;
    const ProblemInstance prob = make_strongly_monotone_affine(3, mu, 0.0);
    HpeConfig cfg;
    cfg.theta = theta;
    cfg.p = 1;
    cfg.max_iters = 60;
    cfg.stop_res = 1e-10;
    const HpeRun result = run(prob, make_exact_oracle(prob, cfg), cfg, random_vector(rng, 3, 1.0));
    for (const auto& rec : result.records) {
      const double ratio = rec.x_next.norm() / rec.x_prev.norm();
      const double err = std::abs(ratio - 1.0 / (1.0 + theta * mu));
      r.observe(1e-8 - err, err <= 1e-8);
    }
  });

  guarded(items, "inexact_eps_steps", [&](InvariantResult& r) {
    // Exact resolvent pairs declared with eps > 0 still satisfy the relaxed
    // certificate; the enlargement falsifier must not fire.
    const ProblemInstance prob = make_bilinear_saddle(2);
    HpeConfig cfg;
    cfg.sigma = 0.5;
    cfg.theta = 0.2;
    cfg.p = 1;
    cfg.max_iters = 300;
    const Oracle exact = make_exact_oracle(prob, cfg);
    const Oracle padded = [&](const Vector& x, int k) {
      OracleStep s = exact(x, k);
      s.eps = 0.5 * cfg.sigma * cfg.sigma * (s.y - x).squaredNorm() / (2.0 * s.lambda);
      return s;
    };
    const HpeRun result = run(prob, padded, cfg, random_vector(rng, 2, 1.0));
    for (const auto& rec : result.records) {
      const auto rep = eps_enlargement_check(prob.op, rec.y, rec.v, rec.eps, 24, static_cast<std::uint64_t>(rec.k) + 7);
      r.observe(rep.worst_margin + 1e-8, rec.cert.ok() && rep.worst_margin >= -1e-8);
    }
    for (const auto& item : check_discrete_lemmas(result.records, prob, cfg).items) {
      r.observe(item.worst_margin, item.passed);
    }
  });
  return items;
}

// ---------------------------------------------------------------- TENSOR

std::vector<InvariantResult> suite_tensor(Rng& rng) {
  std::vector<InvariantResult> items;

  struct TensorCase {
    ProblemInstance problem;
    int p;
    double lipschitz;
    int max_iters;
  };
  std::vector<TensorCase> cases;
  cases.push_back({make_bilinear_saddle(4), 1, 1.0, 5000});
  cases.push_back({make_bilinear_saddle(4), 2, 200.0, 5000});
  const ProblemInstance strong = make_strongly_monotone_affine(4, 1.0);
  cases.push_back({strong, 1, strong.lipschitz, 2000});
  cases.push_back({strong, 2, 3.0, 2000});
  // For p = 2 the cubic terms only have a locally Lipschitz DF: 6R on the
  // radius-R ball. Runs start in the unit ball and stay in the radius-2 ball.
  cases.push_back({make_cubic_1d(), 2, 12.0, 2000});
  cases.push_back({make_cubic_1d(), 3, 6.0, 2000});
  cases.push_back({make_convex_gradient(3), 2, 12.0, 2000});
  cases.push_back({make_convex_gradient(3), 3, 6.0, 2000});

  InvariantResult sigma_hat_cert("sigma_hat_certificate");
  InvariantResult taylor("taylor_error_bound");
  InvariantResult composite("composite_relative_error");
  InvariantResult equivalence("hpe_certificate_equivalence");
  InvariantResult membership("v_in_A_y");
  std::string notes;
  for (const auto& c : cases) {
    const std::string tag = c.problem.name + ".p" + std::to_string(c.p);
    TensorConfig cfg;
    cfg.p = c.p;
    cfg.lipschitz = c.lipschitz;
    cfg.max_iters = c.max_iters;
    const HpeConfig hpe = cfg.as_hpe();
    auto last = std::make_shared<std::optional<double>>();
    // The oracle re-derives every quantity the certificates are built from.
    const Oracle oracle = [&, last](const Vector& x, int) {
      const Vector anchor = project_domain(c.problem.op, x);
      const WindowStep w = lambda_window_search(c.problem, x, cfg, last->value_or(1.0));
      *last = w.lambda;
      const double step = (w.y - x).norm();
      const double inexact = (w.lambda * w.u + w.y - x).norm();
      sigma_hat_cert.observe(cfg.sigma_hat * step - inexact, inexact <= cfg.sigma_hat * step);

      const Vector model = taylor_surrogate(c.problem.op, anchor, cfg.p, w.y);
      const Vector fy = evaluate_single_valued(c.problem.op, w.y);
      const double lhs = w.lambda * (fy - model).norm();
      const double rhs = w.lambda * cfg.lipschitz / factorial(cfg.p) * std::pow(step, cfg.p);
      const double tol = 1e-10 * std::max(1.0, w.lambda * fy.norm());
      taylor.observe(rhs + tol - lhs, lhs <= rhs + tol);

      OracleStep s;
      s.lambda = w.lambda;
      s.v = fy + w.u - model;
      s.y = w.y;
      const double comp = (s.lambda * s.v + s.y - x).norm();
      const double cap = cfg.sigma() * step;
      composite.observe(cap - comp, comp <= cap * (1.0 + 1e-12));
      const double mv = membership_violation(c.problem.op, s.y, s.v);
      membership.observe(1e-8 - mv, mv <= 1e-8 * std::max(1.0, s.v.norm()));
      return s;
    };
    try {
      Vector x0 = project_domain(c.problem.op, random_vector(rng, c.problem.op.dim(), 1.0));
      if (x0.norm() > 1.0) x0.normalize();
      HpeConfig loose = hpe;
      loose.cert_tol = 1e300;  // let every step through so the strict count below sees it
      const HpeRun result = run(c.problem, oracle, loose, x0);
      for (const auto& rec : result.records) {
        const Certificate cert = verify_step(hpe, rec.x_prev, rec.lambda, rec.y, rec.v, rec.eps);
        equivalence.observe(std::min(cert.relative_error_slack, cert.large_step_slack), cert.ok());
      }
      merge(items, "lemmas." + tag, check_discrete_lemmas(result.records, c.problem, hpe));
      notes += tag + ":" + std::to_string(result.records.size()) + " ";
    } catch (const std::exception& e) {
      items.push_back(failed("run." + tag, e.what()));
    }
  }
  equivalence.note = notes;
  for (auto* item : {&sigma_hat_cert, &taylor, &composite, &equivalence, &membership}) items.push_back(*item);

  guarded(items, "extragradient_regression", [&](InvariantResult& r) {
    // p = 1: y = P_C(x - lambda F(P_C x)), the extragradient predictor.
    const ProblemInstance prob = make_bilinear_saddle(4);
    TensorConfig cfg;
    cfg.p = 1;
    cfg.lipschitz = 1.0;
    const auto& m = prob.op.affine()->matrix;
    const auto& box = std::get<Box>(prob.op.domain());
    for (int n = 0; n < 100; ++n) {
      const Vector x = random_vector(rng, 4, 1.5);
      const OracleStep s = tensor_oracle(prob, x, cfg);
      const Vector xp = x.cwiseMax(box.lower).cwiseMin(box.upper);
      const Vector eg = (x - s.lambda * (m * xp)).cwiseMax(box.lower).cwiseMin(box.upper);
      const double err = (s.y - eg).norm();
      r.observe(1e-12 - err, err <= 1e-12);
    }
  });
  return items;
}

// ---------------------------------------------------------------- METRICS

ProblemInstance general_affine_box(Rng& rng, int d) {
  OperatorParts parts;
  parts.affine = AffinePart{random_monotone_matrix(rng, d), random_vector(rng, d, 0.5)};
  parts.domain = unit_box(d, 1.0);
  return ProblemInstance{"affine_box", OperatorSpec(std::move(parts)), UnknownSolution{}, std::nullopt, 1, 1.0};
}

std::vector<InvariantResult> suite_metrics(Rng& rng) {
  std::vector<InvariantResult> items;
  std::vector<ProblemInstance> bounded{make_bilinear_saddle(2), make_bilinear_saddle(6, 2.0)};
  for (int d : {2, 3, 4}) bounded.push_back(general_affine_box(rng, d));

  guarded(items, "gap_nonnegative", [&](InvariantResult& r) {
    for (const auto& p : bounded) {
      for (int n = 0; n < 100; ++n) {
        const double g = gap(p, project_domain(p.op, random_vector(rng, p.op.dim(), 1.2)));
        r.observe(g + 1e-10, g >= -1e-10);
      }
    }
  });

  guarded(items, "gap_zero_on_solutions", [&](InvariantResult& r) {
    for (int d : {2, 4, 8}) {
      const ProblemInstance p = make_bilinear_saddle(d, 1.5);
      const double g = std::abs(gap(p, nearest_solution(p, Vector::Zero(d))));
      r.observe(1e-8 - g, g <= 1e-8);
    }
  });

  guarded(items, "gap_convexity", [&](InvariantResult& r) {
    for (const auto& p : bounded) {
      for (int n = 0; n < 60; ++n) {
        const Vector x1 = project_domain(p.op, random_vector(rng, p.op.dim(), 1.2));
        const Vector x2 = project_domain(p.op, random_vector(rng, p.op.dim(), 1.2));
        const double mid = gap(p, 0.5 * (x1 + x2));
        const double chord = 0.5 * gap(p, x1) + 0.5 * gap(p, x2);
        r.observe(chord + 1e-8 - mid, mid <= chord + 1e-8);
      }
    }
  });

  guarded(items, "residue_below_oracle_v", [&](InvariantResult& r) {
    for (const auto& p : zoo()) {
      HpeConfig cfg;
      cfg.theta = 0.3;
      cfg.p = p.order_p;
      for (int n = 0; n < 25; ++n) {
        const Vector x = project_domain(p.op, random_vector(rng, p.op.dim(), 1.0));
        if (min_norm_residual(p.op, x) <= 1e-9) continue;
        const OracleStep s = exact_oracle(p, x, cfg);
        const double res = residue(p, s.y);
        r.observe(s.v.norm() + 1e-8 - res, res <= s.v.norm() + 1e-8);
      }
    }
  });

  guarded(items, "rate_fit_recovery", [&](InvariantResult& r) {
    for (double slope : {-0.5, -1.0, -1.5, -2.0}) {
      Series s;
      for (int k = 1; k <= 400; ++k) s.emplace_back(k, 3.0 * std::pow(k, slope));
      const double err = std::abs(fit_rate(s, 0.5).slope - slope);
      r.observe(1e-10 - err, err <= 1e-10);
    }
  });
  return items;
}

using SuiteFn = std::vector<InvariantResult> (*)(Rng&);

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> r{{"FEEDBACK", suite_feedback}, {"FLOW", suite_flow},
                                                {"HPE", suite_hpe},           {"TENSOR", suite_tensor},
                                                {"METRICS", suite_metrics},   {"CORE", suite_core}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"CORE", "FEEDBACK", "FLOW", "HPE", "TENSOR", "METRICS"};
  return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw Error(ErrorCode::kInvalidArgument, "unknown suite '" + name + "'");
  // Each suite gets its own stream so results do not depend on scheduling.
  std::seed_seq seq{seed, static_cast<std::uint64_t>(std::hash<std::string>{}(name))};
  Rng rng(seq);
  SuiteResult out{name, {}, {}};
  try {
    out.items = it->second(rng);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<SuiteResult> run_suites(const std::string& which, std::uint64_t seed, int threads) {
  std::vector<std::string> names;
  if (which == "ALL") {
    names = suite_names();
  } else if (registry().count(which)) {
    names = {which};
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown suite '" + which + "'");
  }
  std::vector<SuiteResult> results(names.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t start = 0; start < names.size(); start += width) {
    std::vector<std::future<SuiteResult>> batch;
    for (std::size_t i = start; i < std::min(names.size(), start + width); ++i) {
      batch.push_back(std::async(std::launch::async, run_suite, names[i], seed));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) results[start + i] = batch[i].get();
  }
  return results;
}

int thread_cap() {
  if (const char* env = std::getenv("MONOFLOW_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 64L));
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

}  // namespace monoflow::app
