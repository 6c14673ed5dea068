#include <benchmark/benchmark.h>

#include "monoflow/feedback.hpp"
#include "monoflow/flow.hpp"
#include "monoflow/metrics.hpp"
#include "monoflow/problems.hpp"
#include "monoflow/resolvent.hpp"
#include "monoflow/tensor.hpp"

using namespace monoflow;

namespace {

Vector start(int d) {
  Vector x = Vector::LinSpaced(d, -0.8, 0.9);
  return x;
}

ProblemInstance by_index(int which, int d) {
  switch (which) {
    case 0: return make_bilinear_saddle(d);
    case 1: return make_strongly_monotone_affine(d, 1.0);
    default: return make_convex_gradient(d);
  }
}

}  // namespace

// affine on a box goes through semismooth Newton, the rest are closed form
static void BM_Resolvent(benchmark::State& state) {
  const auto prob = by_index(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Vector x = 1.5 * start(prob.op.dim());
  for (auto _ : state) benchmark::DoNotOptimize(resolvent(prob.op, 3.0, x));
}
BENCHMARK(BM_Resolvent)->ArgsProduct({{0, 1, 2}, {2, 10, 50}});

static void BM_SolveLambda(benchmark::State& state) {
  const auto prob = make_bilinear_saddle(static_cast<int>(state.range(1)));
  const FeedbackParams params{0.1, static_cast<int>(state.range(0))};
  const Vector x = start(prob.op.dim());
  for (auto _ : state) benchmark::DoNotOptimize(solve_lambda(prob.op, x, params));
}
BENCHMARK(BM_SolveLambda)->ArgsProduct({{2, 3}, {2, 10}});

static void BM_SolveLambdaWarm(benchmark::State& state) {
  const auto prob = make_bilinear_saddle(10);
  const FeedbackParams params{0.1, 2};
  const Vector x = start(10);
  const double hint = solve_lambda(prob.op, x, params) * 1.01;
  for (auto _ : state) benchmark::DoNotOptimize(solve_lambda(prob.op, x, params, hint));
}
BENCHMARK(BM_SolveLambdaWarm);

// 100 RK4 steps, i.e. 400 closed-loop solves
static void BM_FlowSteps(benchmark::State& state) {
  const auto prob = make_bilinear_saddle(static_cast<int>(state.range(1)));
  const FeedbackParams params{0.1, static_cast<int>(state.range(0))};
  const Vector x0 = start(prob.op.dim());
  for (auto _ : state) benchmark::DoNotOptimize(integrate(prob, x0, params, 1.0, 0.01));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_FlowSteps)->ArgsProduct({{1, 2}, {2, 10}});

static void BM_GapSkew(benchmark::State& state) {
  const auto prob = make_bilinear_saddle(static_cast<int>(state.range(0)));
  const Vector x = 0.5 * start(prob.op.dim());
  for (auto _ : state) benchmark::DoNotOptimize(gap(prob, x));
}
BENCHMARK(BM_GapSkew)->Arg(2)->Arg(10)->Arg(50);

// non-skew F forces the certified QP path
static void BM_GapQp(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto base = make_strongly_monotone_affine(d, 0.3, 2.0);
  OperatorParts parts = base.op.parts();
  parts.domain = Box{-Vector::Ones(d), Vector::Ones(d)};
  const ProblemInstance prob{"affine_box", OperatorSpec(parts), UnknownSolution{}, std::nullopt, 1, 0.0};
  const Vector x = 0.5 * start(d);
  for (auto _ : state) benchmark::DoNotOptimize(gap(prob, x));
}
BENCHMARK(BM_GapQp)->Arg(2)->Arg(4)->Arg(10);

static void BM_TensorOracle(benchmark::State& state) {
  const auto prob = make_convex_gradient(3);
  TensorConfig cfg;
  cfg.p = static_cast<int>(state.range(0));
  cfg.lipschitz = cfg.p == 2 ? 12.0 : 6.0;
  const Vector x = 0.5 * start(3);
  for (auto _ : state) benchmark::DoNotOptimize(tensor_oracle(prob, x, cfg));
}
BENCHMARK(BM_TensorOracle)->Arg(2)->Arg(3);

BENCHMARK_MAIN();
