#include <benchmark/benchmark.h>

#include "relurec/arrangements.hpp"
#include "relurec/ensembles.hpp"
#include "relurec/isometry.hpp"
#include "relurec/programs.hpp"
#include "relurec/solvers.hpp"
#include "relurec/theory.hpp"

namespace {

using namespace relurec;

void BM_EnumerateExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DataMatrix x = gen_matrix(MatrixKind::gaussian, n, 3, 11);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_exact(x).patterns.size());
  state.SetComplexityN(n);
}
BENCHMARK(BM_EnumerateExact)->Arg(6)->Arg(10)->Arg(14)->Complexity();

void BM_SamplePatterns(benchmark::State& state) {
  const DataMatrix x = gen_matrix(MatrixKind::gaussian, 200, 20, 12);
  for (auto _ : state) benchmark::DoNotOptimize(sample_patterns(x, static_cast<int>(state.range(0)), 3).patterns.size());
}
BENCHMARK(BM_SamplePatterns)->Arg(100)->Arg(1000);

void BM_AllOnesMargin(benchmark::State& state) {
  const DataMatrix x = gen_matrix(MatrixKind::gaussian, static_cast<int>(state.range(0)), 10, 13);
  for (auto _ : state) benchmark::DoNotOptimize(allones_margin(x.mat).t_star);
}
BENCHMARK(BM_AllOnesMargin)->Arg(12)->Arg(40);

// A skip-connection program with a planted linear model, sized like one cell of the phase grid.
ConvexProgram skip_program(int n, int d, ProgramKind kind) {
  const DataMatrix x = gen_matrix(MatrixKind::gaussian, n, d, 21);
  const PatternSet pats = sample_patterns(x, default_sample_count(n), 22);
  const Vec w = gen_matrix(MatrixKind::gaussian, d, 1, 23).mat.col(0);
  return build_program(kind, x.mat, pats, plant_output(PlantedModel::linear(w), x.mat));
}

void BM_SolveMinNorm(benchmark::State& state) {
  const int d = 10;
  const ConvexProgram prog = skip_program(static_cast<int>(state.range(0)), d, ProgramKind::grelu_skip);
  for (auto _ : state) benchmark::DoNotOptimize(solve_group_min_norm(prog.problem).objective);
}
BENCHMARK(BM_SolveMinNorm)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_SolveLasso(benchmark::State& state) {
  ConvexProgram prog = skip_program(40, 10, ProgramKind::grelu_skip);
  prog.problem.beta = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(solve_group_lasso(prog.problem).objective);
}
BENCHMARK(BM_SolveLasso)->Unit(benchmark::kMillisecond);

void BM_SolveCone(benchmark::State& state) {
  const ConvexProgram prog = skip_program(static_cast<int>(state.range(0)), 6, ProgramKind::relu_skip_cone);
  for (auto _ : state) benchmark::DoNotOptimize(solve(prog.problem).objective);
}
BENCHMARK(BM_SolveCone)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_NicLinear(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DataMatrix x = gen_matrix(MatrixKind::gaussian, n, 10, 31);
  const PatternSet pats = sample_patterns(x, default_sample_count(n), 32);
  const Vec w = Vec::Ones(10);
  for (auto _ : state) benchmark::DoNotOptimize(nic_linear(x.mat, w, pats).max_lhs);
}
BENCHMARK(BM_NicLinear)->Arg(40)->Arg(100);

void BM_ThetaStar(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(solve_theta_star());
}
BENCHMARK(BM_ThetaStar);

void BM_CurveG2(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(curve_g2(0.3, 0.4));
}
BENCHMARK(BM_CurveG2);

}  // namespace

BENCHMARK_MAIN();
