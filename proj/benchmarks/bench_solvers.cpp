#include <benchmark/benchmark.h>

#include "svi/oracles.hpp"
#include "svi/problems.hpp"
#include "svi/projections.hpp"
#include "svi/solver_tyk.hpp"
#include "svi/solver_ws.hpp"

using namespace svi;

static void BM_WsStep(benchmark::State& state) {
  auto n = static_cast<int>(state.range(0));
  auto e = make_weak_sharp_lp(n, 2 * n, 1.0, 2024);
  auto sched = WsSchedule::robust(1.0, 2.0, 1.0);
  auto control = ControlSequence::uniform(e.spec);
  WsState st = WsState::init(project_hard(e.spec, e.x0), 1);
  for (auto _ : state) {
    ws_step(st, e.problem, e.spec, sched, control);
    benchmark::DoNotOptimize(st.x);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_WsStep)->Arg(5)->Arg(20);

static void BM_TykStepRotation(benchmark::State& state) {
  auto e = make_rotation_cartesian(0.5);
  auto sched = TykSchedule::asynchronous(2, 0.25, {1.0, 2.0}, {1.0, 3.0}, {1.0, 1.0});
  auto control = ControlSequence::uniform(e.spec);
  TykState st = TykState::init(e.x0, 1);
  for (auto _ : state) {
    tyk_step(st, e.problem, e.spec, sched, control);
    benchmark::DoNotOptimize(st.x);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TykStepRotation);

static void BM_SimplexProjection(benchmark::State& state) {
  auto n = state.range(0);
  auto sx = HardSet::simplex(n);
  RngStream rng(3, 0);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(-1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sx.project(x));
  }
}
BENCHMARK(BM_SimplexProjection)->Arg(10)->Arg(100)->Arg(1000);

static void BM_DykstraThreeHalfspaces(benchmark::State& state) {
  RngStream rng(5, 0);
  std::vector<HardSet> sets;
  for (int i = 0; i < 3; ++i) {
    Vector a(3);
    for (int j = 0; j < 3; ++j) a[j] = rng.uniform(-1, 1);
    sets.push_back(HardSet::halfspace(a, -0.2));
  }
  Vector x = Vector::Ones(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dykstra_project(sets, x));
  }
}
BENCHMARK(BM_DykstraThreeHalfspaces);

static void BM_GapBoxFaceEnumeration(benchmark::State& state) {
  auto n = state.range(0);
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  M(0, 1) = M(1, 0) = 0.4;
  auto dom = GapDomain::box(-Vector::Ones(n), Vector::Ones(n));
  Vector x = 0.3 * Vector::Ones(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gap_value(M, Vector::Zero(n), dom, x));
  }
}
BENCHMARK(BM_GapBoxFaceEnumeration)->Arg(2)->Arg(5)->Arg(8);

BENCHMARK_MAIN();
