#include <benchmark/benchmark.h>

#include "maxent/approximator.hpp"
#include "maxent/baselines.hpp"
#include "maxent/basis.hpp"
#include "maxent/dynamics.hpp"
#include "maxent/experiments.hpp"
#include "maxent/random.hpp"

using namespace maxent;

namespace {

NodeSet unit_grid(int d, int per_axis) {
  return grid_nodes(std::vector<Interval>(static_cast<std::size_t>(d), Interval{0.0, 1.0}),
                    std::vector<int>(static_cast<std::size_t>(d), per_axis));
}

Eigen::MatrixXd random_points(int d, int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd p(d, n);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(0.01, 0.99);
  return p;
}

// One query against a grid; args: dimension, nodes per axis, beta.
void BM_SolveBasis(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const NodeSet nodes = unit_grid(d, static_cast<int>(state.range(1)));
  const double beta = static_cast<double>(state.range(2));
  const Eigen::MatrixXd q = random_points(d, 64, 1);
  Eigen::Index k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_basis(nodes, q.col(k), beta));
    k = (k + 1) % q.cols();
  }
  state.counters["nodes"] = static_cast<double>(nodes.size());
}
BENCHMARK(BM_SolveBasis)->Args({1, 10, 100})->Args({2, 8, 10})->Args({3, 5, 1})->Args({4, 5, 1});

void BM_InHull(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const NodeSet nodes = unit_grid(d, 5);
  const Eigen::MatrixXd q = random_points(d, 64, 2);
  Eigen::Index k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(in_hull(nodes, q.col(k)));
    k = (k + 1) % q.cols();
  }
}
BENCHMARK(BM_InHull)->Arg(2)->Arg(3)->Arg(4);

void BM_BasisMatrix(benchmark::State& state) {
  const NodeSet nodes = unit_grid(2, 8);
  const Eigen::MatrixXd q = random_points(2, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(basis_matrix(nodes, q, 10.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BasisMatrix)->Arg(256)->Arg(1024);

void BM_FitGauss2d(benchmark::State& state) {
  const FunctionProblem p = gen_gauss2d(default_experiment_config("gauss2d"));
  for (auto _ : state) benchmark::DoNotOptimize(fit(p.nodes, p.train, 10.0, 0.0));
}
BENCHMARK(BM_FitGauss2d)->Unit(benchmark::kMillisecond);

void BM_L1Coefficients(benchmark::State& state) {
  const FunctionProblem p = gen_sine(default_experiment_config("sine"));
  const BasisMatrix b = basis_matrix(p.nodes, p.train.points, 100.0);
  const Eigen::VectorXd f = p.train.values.col(0);
  for (auto _ : state) benchmark::DoNotOptimize(l1_coefficients(b.values, f, 1e-3));
}
BENCHMARK(BM_L1Coefficients)->Unit(benchmark::kMillisecond);

void BM_LorenzSurrogateRollout(benchmark::State& state) {
  const ExperimentConfig c = default_experiment_config("lorenz");
  const DynamicsProblem p = gen_lorenz(c);
  const SurrogateModel m = fit_dynamics(p.nodes, p.train, c.beta, c.alpha, c.solver);
  const Point x0 = p.truth.states.row(0).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(integrate(m, x0, 0.0, 1.0, p.dt));
}
BENCHMARK(BM_LorenzSurrogateRollout)->Unit(benchmark::kMillisecond);

void BM_DictFitLorenz(benchmark::State& state) {
  const DynamicsProblem p = gen_lorenz(default_experiment_config("lorenz"));
  const Dictionary d = Dictionary::polynomial(3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dict_fit(d, p.train));
}
BENCHMARK(BM_DictFitLorenz);

}  // namespace

BENCHMARK_MAIN();
