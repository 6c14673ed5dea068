#include "monoflow_app/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "monoflow/error.hpp"
#include "monoflow/flow.hpp"
#include "monoflow/hpe.hpp"
#include "monoflow/tensor.hpp"

namespace monoflow::app {

using nlohmann::json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double try_gap(const ProblemInstance& problem, const Vector& x) {
  if (!problem.domain_bounded() || !problem.op.is_affine()) return kNan;
  return gap(problem, x);
}

double try_dist(const ProblemInstance& problem, const Vector& x) {
  return problem.solution_known() ? dist_to_solutions(problem, x) : kNan;
}

json fit_json(const Series& series, double tail_fraction) {
  if (series.empty()) return json(nullptr);
  try {
    const RateFit f = fit_rate(series, tail_fraction);
    return {{"slope", f.slope},           {"intercept", f.intercept}, {"r_squared", f.r_squared},
            {"index_min", f.index_min},   {"index_max", f.index_max}, {"points", f.points},
            {"dropped", f.dropped}};
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const InvariantReport& rep) {
  json items = json::array();
  for (const auto& r : rep.items) {
    items.push_back({{"name", r.name}, {"passed", r.passed}, {"worst_margin", nullable(r.worst_margin)},
                     {"evaluated", r.evaluated}});
  }
  return items;
}

void run_flow(const ExperimentConfig& cfg, const ProblemInstance& problem, const Vector& x0, ExperimentResult& out) {
  FlowOptions opts;
  opts.sample_stride = cfg.sample_stride;
  const Trajectory traj = integrate(problem, x0, cfg.flow, cfg.horizon, cfg.step, opts);

  const auto d = problem.op.dim();
  out.table.header = {"t"};
  for (Eigen::Index i = 0; i < d; ++i) out.table.header.push_back("x" + std::to_string(i));
  for (const char* c : {"lambda", "speed", "gap_ergodic", "residue_pointwise", "dist", "E"}) out.table.header.push_back(c);

  for (std::size_t n = 0; n < traj.samples.size(); ++n) {
    const FlowState& s = traj.samples[n];
    std::vector<double> row{s.t};
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(s.x[i]);
    const double speed = (s.x - s.y).norm();
    const double g = n == 0 ? kNan : try_gap(problem, s.ergodic);
    const double res = residue(problem, s.y);
    const double dist = try_dist(problem, s.x);
    row.insert(row.end(), {s.lambda, speed, g, res, dist, std::isfinite(dist) ? 0.5 * dist * dist : kNan});
    out.table.rows.push_back(std::move(row));
    if (s.t > 0.0) {
      if (std::isfinite(g)) out.gap.emplace_back(s.t, g);
      out.residue.emplace_back(s.t, res);
      if (std::isfinite(dist)) out.dist.emplace_back(s.t, dist);
    }
  }
  out.summary["status"] = traj.status == FlowStatus::kStationary ? "STATIONARY" : "COMPLETED";
  out.summary["steps"] = traj.steps;
  out.summary["max_ae_residual"] = traj.max_ae_residual;
  out.summary["invariants"] = report_json(check_flow_invariants(traj, problem, cfg.flow));
}

void run_discrete(const ExperimentConfig& cfg, const ProblemInstance& problem, const Vector& x0,
                  ExperimentResult& out) {
  const HpeConfig hpe = cfg.mode == Mode::kTensor ? cfg.tensor.as_hpe() : cfg.hpe;
  const Oracle oracle =
      cfg.mode == Mode::kTensor ? make_tensor_oracle(problem, cfg.tensor) : make_exact_oracle(problem, hpe);
  const HpeRun result = run(problem, oracle, hpe, x0);

  out.table.header = {"k", "lambda", "v_norm", "eps", "step_norm", "gap_ergodic", "residue_min_so_far", "dist"};
  Vector num = Vector::Zero(problem.op.dim());
  double den = 0.0;
  double res_min = std::numeric_limits<double>::infinity();
  int cert_ok = 0;
  for (const auto& r : result.records) {
    const double k = static_cast<double>(r.k + 1);
    num += r.lambda * r.y;
    den += r.lambda;
    const double g = try_gap(problem, num / den);
    res_min = std::min(res_min, residue(problem, r.y));
    const double dist = try_dist(problem, r.x_next);
    out.table.rows.push_back({k, r.lambda, r.v.norm(), r.eps, (r.y - r.x_prev).norm(), g, res_min, dist});
    if (std::isfinite(g)) out.gap.emplace_back(k, g);
    out.residue.emplace_back(k, res_min);
    if (std::isfinite(dist)) out.dist.emplace_back(k, dist);
    cert_ok += r.cert.ok() ? 1 : 0;
  }
  out.summary["status"] = result.status == HpeStatus::kSolved ? "SOLVED" : "MAX_ITERS";
  out.summary["iterations"] = result.records.size();
  out.summary["certificates"] = {{"passed", cert_ok}, {"total", result.records.size()}};
  if (problem.solution_known()) out.summary["invariants"] = report_json(check_discrete_lemmas(result.records, problem, hpe));

  // Worst tail contraction of the distance, reported for error-bound problems.
  if (out.dist.size() >= 2) {
    double worst = 0.0;
    const std::size_t start = out.dist.size() / 2;
    for (std::size_t i = std::max<std::size_t>(start, 1); i < out.dist.size(); ++i) {
      if (out.dist[i - 1].second > 1e-12) worst = std::max(worst, out.dist[i].second / out.dist[i - 1].second);
    }
    out.summary["tail_dist_ratio"] = worst;
  }
}

}  // namespace

Vector initial_point(const ExperimentConfig& cfg, const ProblemInstance& problem) {
  const auto d = problem.op.dim();
  if (cfg.x0) return Eigen::Map<const Vector>(cfg.x0->data(), static_cast<Eigen::Index>(cfg.x0->size()));
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector x(d);
  const ConvexSet& set = problem.op.domain();
  if (const auto* box = std::get_if<Box>(&set)) {
    for (Eigen::Index i = 0; i < d; ++i) x[i] = box->lower[i] + (box->upper[i] - box->lower[i]) * unit(rng);
  } else if (const auto* ball = std::get_if<Ball>(&set)) {
    for (Eigen::Index i = 0; i < d; ++i) x[i] = 2.0 * unit(rng) - 1.0;
    x = ball->center + ball->radius * unit(rng) * x.normalized();
  } else {
    for (Eigen::Index i = 0; i < d; ++i) x[i] = 2.0 * unit(rng) - 1.0;
  }
  return x;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const ProblemInstance problem = make_problem(cfg.problem);
  const Vector x0 = initial_point(cfg, problem);

  ExperimentResult out;
  out.summary["mode"] = to_string(cfg.mode);
  out.summary["problem"] = problem.name;
  out.summary["p"] = cfg.order();
  out.summary["seed"] = cfg.seed;
  if (cfg.mode == Mode::kFlow) {
    run_flow(cfg, problem, x0, out);
  } else {
    run_discrete(cfg, problem, x0, out);
  }

  json fin;
  const auto& rows = out.table.rows;
  fin["gap"] = out.gap.empty() ? json(nullptr) : json(out.gap.back().second);
  fin["residue"] = out.residue.empty() ? json(nullptr) : json(out.residue.back().second);
  fin["dist"] = out.dist.empty() ? json(nullptr) : json(out.dist.back().second);
  out.summary["rows"] = rows.size();
  out.summary["final"] = fin;
  out.summary["fits"] = {{"gap", fit_json(out.gap, cfg.tail_fraction)},
                         {"residue", fit_json(out.residue, cfg.tail_fraction)}};
  out.summary["theory"] = {{"gap_exponent", -0.5 * (cfg.order() + 1)}, {"residue_exponent", -0.5 * cfg.order()}};
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(const TraceTable& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

}  // namespace monoflow::app
