#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "landlab/errors.hpp"
#include "landlab/evaluator.hpp"
#include "landlab/network.hpp"
#include "oracles.hpp"

namespace landlab {
namespace {

using oracle::gradient_check;
using oracle::make_genotype;

Phenotype phenotype(const Genotype& g, Shape input, int classes) {
  auto d = decode(g, input, classes);
  EXPECT_TRUE(std::holds_alternative<Phenotype>(d));
  return std::get<Phenotype>(d);
}

TEST(Decode, ValidConvolutionArithmetic) {
  const auto g = make_genotype({ConvGene{32, 3, 1, Activation::Relu, true}}, {}, 10);
  const Phenotype p = phenotype(g, {8, 8, 1}, 10);
  EXPECT_EQ(p.layers[0].output, (Shape{6, 6, 32}));
}

TEST(Decode, StridedConvThenOversizedPoolIsInfeasible) {
  const auto ok = make_genotype({ConvGene{32, 5, 3, Activation::Relu, true}}, {}, 10);
  EXPECT_EQ(std::get<Phenotype>(decode(ok, {8, 8, 1}, 10)).layers[0].output, (Shape{2, 2, 32}));
  const auto bad = make_genotype(
      {ConvGene{32, 5, 3, Activation::Relu, true}, PoolGene{PoolType::Max, 3, 1}}, {}, 10);
  const auto d = decode(bad, {8, 8, 1}, 10);
  ASSERT_TRUE(std::holds_alternative<ShapeInfeasible>(d));
  EXPECT_EQ(std::get<ShapeInfeasible>(d).layer_index, 1u);
}

TEST(Decode, MinimalGenotypeEndsInSoftmaxOfClassCount) {
  const auto g = make_genotype({ConvGene{}}, {}, 10);
  const Phenotype p = phenotype(g, {28, 28, 1}, 10);
  const auto& last = std::get<DenseLayer>(p.layers.back().spec);
  EXPECT_EQ(last.units, 10);
  EXPECT_EQ(last.activation, Activation::Softmax);
  EXPECT_EQ(p.layers.back().output, (Shape{1, 1, 10}));
  EXPECT_TRUE(std::holds_alternative<FlattenLayer>(p.layers[1].spec));
  EXPECT_EQ(p.optimizer.learning_rate, 1e-2);
  EXPECT_TRUE(p.optimizer.nesterov);
}

TEST(Decode, ClassCountMismatchIsConfigError) {
  const auto g = make_genotype({ConvGene{}}, {}, 10);
  EXPECT_THROW(decode(g, {28, 28, 1}, 3), ConfigError);
}

TEST(Decode, ExtentFormula) {
  EXPECT_EQ(valid_extent(8, 3, 1), 6);
  EXPECT_EQ(valid_extent(8, 5, 3), 2);
  EXPECT_EQ(valid_extent(2, 3, 1), 0);
  EXPECT_EQ(valid_extent(28, 5, 2), 12);
}

TEST(Decode, ParameterCount) {
  const auto g = make_genotype({ConvGene{32, 3, 1, Activation::Relu, true}},
                               {DenseGene{16, Activation::Relu, false}}, 10);
  const Phenotype p = phenotype(g, {8, 8, 1}, 10);
  EXPECT_EQ(p.parameter_count(), (9u * 32 + 32) + (6u * 6 * 32 * 16) + (16u * 10 + 10));
}

TEST(Gradient, ConvMaxPoolDenseDropoutReluElu) {
  const auto g = make_genotype({ConvGene{4, 3, 1, Activation::Relu, true}, PoolGene{PoolType::Max, 2, 2}},
                               {DenseGene{8, Activation::Elu, true}, DropoutGene{0.3}}, 3);
  const Phenotype p = phenotype(g, {8, 8, 2}, 3);
  const oracle::GradCheck eval = gradient_check(p, false, 11);
  EXPECT_LT(eval.max_relative, 1e-3);
  const oracle::GradCheck train = gradient_check(p, true, 11);
  EXPECT_LT(train.max_relative, 1e-3);
  EXPECT_EQ(eval.checked, p.parameter_count());
}

TEST(Gradient, StridedConvAvgPoolSigmoidNoBias) {
  const auto g = make_genotype({ConvGene{3, 2, 2, Activation::Sigmoid, false},
                                PoolGene{PoolType::Avg, 2, 1}, ConvGene{5, 2, 1, Activation::Elu, true}},
                               {DenseGene{6, Activation::Sigmoid, true}}, 4, false);
  const Phenotype p = phenotype(g, {9, 9, 1}, 4);
  EXPECT_LT(gradient_check(p, false, 5).max_relative, 1e-3);
}

TEST(Gradient, OverlappingPoolsAndLargeStrides) {
  const auto g = make_genotype({ConvGene{3, 3, 1, Activation::Elu, true}, PoolGene{PoolType::Max, 3, 2},
                                PoolGene{PoolType::Avg, 2, 1}},
                               {DropoutGene{0.5}, DenseGene{5, Activation::Relu, false}}, 2);
  const Phenotype p = phenotype(g, {10, 10, 3}, 2);
  EXPECT_LT(gradient_check(p, false, 21).max_relative, 1e-3);
  EXPECT_LT(gradient_check(p, true, 21).max_relative, 1e-3);
}

TEST(Gradient, DenseOnlyAfterFlatten) {
  const auto g = make_genotype({ConvGene{2, 2, 3, Activation::Relu, true}}, {}, 3);
  const Phenotype p = phenotype(g, {7, 7, 1}, 3);
  EXPECT_LT(gradient_check(p, false, 2).max_relative, 1e-3);
}

TEST(Forward, SoftmaxRowsSumToOne) {
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    const Genotype g = random_genotype(Grammar::standard(), 5, rng, {1, 2, 0, 2});
    auto d = decode(g, {12, 12, 1}, 5);
    if (!std::holds_alternative<Phenotype>(d)) continue;
    Network<float> net(std::get<Phenotype>(d), rng);
    std::vector<float> x(4 * 144);
    for (float& v : x) v = static_cast<float>(uniform_real(rng, 0, 1));
    const auto probs = net.predict(x, 4);
    ASSERT_EQ(probs.size(), 20u);
    for (int s = 0; s < 4; ++s) {
      double sum = 0;
      for (int c = 0; c < 5; ++c) {
        ASSERT_GE(probs[s * 5 + c], 0.0f);
        sum += probs[s * 5 + c];
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(Forward, UntrainedLossNearLnTen) {
  Rng data_rng(3);
  const DatasetSplit data = synthetic(10, 30, 28, 28, 1, data_rng);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    const auto g = make_genotype({ConvGene{32, 3, 1, Activation::Relu, true}}, {}, 10);
    Network<float> net(phenotype(g, {28, 28, 1}, 10), rng);
    const auto s = net.score(data.train.pixels, data.train.labels);
    const double mean = s.loss_sum / static_cast<double>(s.count);
    EXPECT_NEAR(mean, std::numbers::ln10, 0.15) << seed;
    EXPECT_GE(mean, 0.0);
  }
}

TEST(Sgd, DecayMomentumAndNesterov) {
  // One scalar parameter with constant gradient 1.
  for (bool nesterov : {false, true}) {
    std::vector<double> w{0.0}, grad{1.0};
    std::vector<ParameterBlock<double>> blocks{{w, grad}};
    Sgd<double> sgd({0.1, 0.5, 0.9, nesterov});
    double v = 0.0, ref = 0.0;
    for (int t = 0; t < 5; ++t) {
      const double lr = 0.1 / (1.0 + 0.5 * t);
      EXPECT_NEAR(sgd.current_learning_rate(), lr, 1e-15);
      v = 0.9 * v - lr * 1.0;
      ref += nesterov ? 0.9 * v - lr * 1.0 : v;
      sgd.step(blocks);
      EXPECT_NEAR(w[0], ref, 1e-12) << t;
    }
    EXPECT_EQ(sgd.iterations(), 5u);
  }
}

TEST(Training, TwoClassSyntheticIsLearned) {
  Rng data_rng(8);
  const DatasetSplit data = synthetic(2, 100, 8, 8, 1, data_rng, "two");
  const auto g = make_genotype({ConvGene{32, 3, 1, Activation::Relu, true}},
                               {DenseGene{32, Activation::Relu, true}}, 2);
  const Phenotype p = phenotype(g, {8, 8, 1}, 2);
  Rng init(1);
  Network<float> untrained(p, init);
  const auto before = untrained.score(data.train.pixels, data.train.labels);
  const FitnessPair f = train_and_score(p, data, {8, 64}, 1);
  EXPECT_GT(f.train_accuracy, 0.9);
  EXPECT_LT(f.train_loss, before.loss_sum / static_cast<double>(before.count));
  EXPECT_GE(f.test_loss, 0.0);
}

TEST(Training, DivergenceGivesPenalty) {
  Rng data_rng(8);
  const DatasetSplit data = synthetic(2, 50, 8, 8, 1, data_rng);
  const auto g = make_genotype({ConvGene{32, 3, 1, Activation::Relu, true}},
                               {DenseGene{32, Activation::Relu, true}}, 2);
  Phenotype p = phenotype(g, {8, 8, 1}, 2);
  p.optimizer.learning_rate = 1e30;
  p.optimizer.momentum = 0.99;
  EXPECT_TRUE(train_and_score(p, data, {8, 16}, 1).is_penalty());
}

TEST(Training, MismatchedSettingsThrow) {
  Rng data_rng(8);
  const DatasetSplit data = synthetic(2, 10, 8, 8, 1, data_rng);
  const auto g = make_genotype({ConvGene{}}, {}, 2);
  EXPECT_THROW(train_and_score(phenotype(g, {9, 9, 1}, 2), data, {8, 64}, 1), ConfigError);
  EXPECT_THROW(train_and_score(phenotype(g, {8, 8, 1}, 2), data, {0, 64}, 1), ConfigError);
}

}  // namespace
}  // namespace landlab
