#include <benchmark/benchmark.h>

#include "landlab/evaluator.hpp"
#include "landlab/network.hpp"

namespace landlab {
namespace {

Genotype small_cnn() {
  Genotype g;
  g.s1 = {ConvGene{32, 3, 1, Activation::Relu, true}, PoolGene{PoolType::Max, 2, 2}};
  g.s2 = {DenseGene{64, Activation::Relu, true}};
  g.output = OutputGene(10, true);
  g.optimizer = OptimizerGene{1e-2, 1e-4, 0.9, true};
  g.id = 1;
  return g;
}

// One full evaluation: 8 epochs on `per_class` x 10 images of 28x28.
void BM_EvaluateCnn(benchmark::State& state) {
  Rng rng(6);
  const DatasetSplit data = synthetic(10, static_cast<std::size_t>(state.range(0)), 28, 28, 1, rng);
  const Genotype g = small_cnn();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_cnn(g, data, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.train.count) * 8);
}
BENCHMARK(BM_EvaluateCnn)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  Rng rng(7);
  const auto d = decode(small_cnn(), {28, 28, 1}, 10);
  Network<float> net(std::get<Phenotype>(d), rng);
  const std::size_t n = 64;
  std::vector<float> x(n * 28 * 28);
  for (float& v : x) v = static_cast<float>(uniform_real(rng, 0, 1));
  for (auto _ : state) benchmark::DoNotOptimize(net.predict(x, n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace landlab
