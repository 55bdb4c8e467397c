#include <gtest/gtest.h>

#include <atomic>
#include <mutex>

#include "landlab/errors.hpp"
#include "landlab/walks.hpp"

namespace landlab {
namespace {

const Grammar& G() { return Grammar::standard(); }

DatasetSplit no_data() {
  DatasetSplit d;
  d.name = "surrogate";
  d.class_count = 10;
  return d;
}

// Records every evaluation in call order.
class Recording final : public FitnessEvaluator {
 public:
  explicit Recording(const FitnessEvaluator& inner) : inner_(inner) {}
  FitnessPair evaluate(const Genotype& g, const DatasetSplit& d, std::uint64_t seed) const override {
    FitnessPair f = inner_.evaluate(g, d, seed);
    std::lock_guard lock(mu_);
    log_.push_back({g, f});
    return f;
  }
  std::string_view name() const override { return "recording"; }
  const std::vector<ScoredGenotype>& log() const { return log_; }

 private:
  const FitnessEvaluator& inner_;
  mutable std::mutex mu_;
  mutable std::vector<ScoredGenotype> log_;
};

// Replaces the test loss with noise; the training loss is untouched.
class CorruptTest final : public FitnessEvaluator {
 public:
  explicit CorruptTest(const FitnessEvaluator& inner) : inner_(inner) {}
  FitnessPair evaluate(const Genotype& g, const DatasetSplit& d, std::uint64_t seed) const override {
    FitnessPair f = inner_.evaluate(g, d, seed);
    f.test_loss = unit_interval(splitmix64(++calls_)) * 1e6;
    f.test_accuracy = 0.0;
    return f;
  }
  std::string_view name() const override { return "corrupt"; }

 private:
  const FitnessEvaluator& inner_;
  mutable std::uint64_t calls_ = 0;
};

class Constant final : public FitnessEvaluator {
 public:
  explicit Constant(FitnessPair f) : f_(f) {}
  FitnessPair evaluate(const Genotype&, const DatasetSplit&, std::uint64_t) const override { return f_; }
  std::string_view name() const override { return "constant"; }

 private:
  FitnessPair f_;
};

WalkTrace walk(const FitnessEvaluator& ev, MutationKind kind, std::uint64_t seed, std::size_t n = 30,
               std::size_t m = 3) {
  Rng rng(seed);
  const Genotype start = random_genotype(G(), 10, rng);
  return selective_walk(start, {kind, n, m, {}}, ev, no_data(), rng);
}

const MutationKind kKinds[] = {MutationKind::Topology, MutationKind::Parameters, MutationKind::Learning};

TEST(Walk, PaperDefaultsGiveNinetyNeighbourEvaluations) {
  const SmoothSurrogate smooth;
  for (MutationKind kind : kKinds) {
    Recording rec(smooth);
    const WalkTrace t = walk(rec, kind, 1);
    EXPECT_EQ(t.steps.size(), 31u);
    EXPECT_EQ(t.train_series().size(), 31u);
    EXPECT_EQ(t.test_series().size(), 31u);
    EXPECT_EQ(t.candidates.size(), 30u);
    EXPECT_EQ(t.neighbor_evaluations(), 90u);
    EXPECT_EQ(t.evaluations, 91u);
    EXPECT_EQ(rec.log().size(), 91u);
  }
}

TEST(Walk, SelectionLegalityAndAlignment) {
  const RuggedSurrogate rugged;
  for (MutationKind kind : kKinds) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const WalkTrace t = walk(rugged, kind, seed);
      for (std::size_t s = 1; s < t.steps.size(); ++s) {
        const auto& cands = t.candidates[s - 1];
        ASSERT_EQ(cands.size(), 3u);
        const auto& chosen = t.steps[s];
        EXPECT_EQ(chosen.genotype, cands[t.chosen[s - 1]].genotype);
        for (const auto& c : cands) EXPECT_LE(chosen.fitness.train_loss, c.fitness.train_loss);
        for (const auto& c : cands) {
          EXPECT_EQ(single_step_violation(t.steps[s - 1].genotype, c.genotype, kind), std::nullopt);
        }
        EXPECT_EQ(t.train_series()[s], chosen.fitness.train_loss);
        EXPECT_EQ(t.test_series()[s], chosen.fitness.test_loss);
      }
    }
  }
}

TEST(Walk, TestLossesNeverSteer) {
  const RuggedSurrogate rugged;
  const SmoothSurrogate smooth;
  for (const FitnessEvaluator* base : {static_cast<const FitnessEvaluator*>(&rugged),
                                       static_cast<const FitnessEvaluator*>(&smooth)}) {
    for (MutationKind kind : kKinds) {
      CorruptTest corrupt(*base);
      const WalkTrace clean = walk(*base, kind, 13);
      const WalkTrace noisy = walk(corrupt, kind, 13);
      ASSERT_EQ(clean.steps.size(), noisy.steps.size());
      for (std::size_t s = 0; s < clean.steps.size(); ++s) {
        EXPECT_EQ(clean.steps[s].genotype, noisy.steps[s].genotype);
        EXPECT_EQ(clean.steps[s].fitness.train_loss, noisy.steps[s].fitness.train_loss);
      }
      EXPECT_EQ(clean.chosen, noisy.chosen);
      EXPECT_NE(clean.test_series(), noisy.test_series());
    }
  }
}

TEST(Walk, SingleNeighbourIsUnselected) {
  const RuggedSurrogate rugged;
  const WalkTrace t = walk(rugged, MutationKind::Parameters, 3, 20, 1);
  EXPECT_EQ(t.neighbor_evaluations(), 20u);
  for (std::size_t c : t.chosen) EXPECT_EQ(c, 0u);
}

TEST(Walk, TiesGoToFirstGenerated) {
  const Constant flat({1.0, 1.0, 0.5, 0.5});
  const WalkTrace t = walk(flat, MutationKind::Topology, 2, 10, 4);
  for (std::size_t c : t.chosen) EXPECT_EQ(c, 0u);
}

TEST(Walk, AllPenaltyNeighboursStillAdvance) {
  const Constant dead(FitnessPair::penalty());
  const WalkTrace t = walk(dead, MutationKind::Parameters, 2);
  EXPECT_EQ(t.steps.size(), 31u);
  for (const auto& s : t.steps) EXPECT_TRUE(s.fitness.is_penalty());
}

// Forced-change moves make a converged walk oscillate around the optimum,
// so descent is measured over the pooled steps of many walks and against
// the rugged baseline rather than per walk.
double non_increasing_fraction(const FitnessEvaluator& ev, MutationKind kind, int seeds,
                               int* final_not_worse) {
  int down = 0, total = 0;
  *final_not_worse = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto f = walk(ev, kind, static_cast<std::uint64_t>(seed)).train_series();
    for (std::size_t i = 1; i < f.size(); ++i) down += f[i] <= f[i - 1];
    total += static_cast<int>(f.size()) - 1;
    *final_not_worse += f.back() <= f.front();
  }
  return static_cast<double>(down) / total;
}

TEST(Walk, SmoothSurrogateDescends) {
  const SmoothSurrogate smooth;
  const RuggedSurrogate rugged;
  int smooth_final = 0, rugged_final = 0;
  const double s = non_increasing_fraction(smooth, MutationKind::Parameters, 40, &smooth_final);
  const double r = non_increasing_fraction(rugged, MutationKind::Parameters, 40, &rugged_final);
  EXPECT_GE(s, 0.7);
  EXPECT_GT(s, r + 0.15);
  EXPECT_GE(smooth_final, 38);
  EXPECT_NEAR(r, 0.5, 0.06);
}

TEST(Walk, DeterministicUnderSeed) {
  const SmoothSurrogate smooth;
  const WalkTrace a = walk(smooth, MutationKind::Topology, 5);
  const WalkTrace b = walk(smooth, MutationKind::Topology, 5);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t s = 0; s < a.steps.size(); ++s) EXPECT_EQ(a.steps[s].genotype, b.steps[s].genotype);
}

TEST(Walk, BadSettings) {
  const SmoothSurrogate smooth;
  EXPECT_THROW(walk(smooth, MutationKind::Learning, 1, 0, 3), ConfigError);
  EXPECT_THROW(walk(smooth, MutationKind::Learning, 1, 3, 0), ConfigError);
}

EvolutionTrace run(const FitnessEvaluator& ev, MutationKind kind, std::uint64_t seed,
                   std::size_t pop = 10, std::size_t gens = 20) {
  Rng rng(seed);
  return evolve({kind, pop, gens, 2, {}}, ev, no_data(), rng);
}

TEST(Evolve, PaperDefaultsGive210Evaluations) {
  const SmoothSurrogate smooth;
  for (MutationKind kind : kKinds) {
    Recording rec(smooth);
    const EvolutionTrace t = run(rec, kind, 1);
    EXPECT_EQ(t.evaluations, 210u);
    EXPECT_EQ(rec.log().size(), 210u);
    EXPECT_EQ(t.best.size(), 21u);
  }
}

TEST(Evolve, BestIsPopulationMinimumPerGeneration) {
  const RuggedSurrogate rugged;
  Recording rec(rugged);
  const EvolutionTrace t = run(rec, MutationKind::Parameters, 4);
  for (std::size_t g = 0; g < t.best.size(); ++g) {
    double best = 1e300;
    for (std::size_t i = 0; i < 10; ++i) best = std::min(best, rec.log()[g * 10 + i].fitness.train_loss);
    EXPECT_EQ(t.best[g].fitness.train_loss, best) << g;
  }
}

TEST(Evolve, OffspringAreSingleMutationsOfThePreviousGeneration) {
  const SmoothSurrogate smooth;
  for (MutationKind kind : kKinds) {
    Recording rec(smooth);
    run(rec, kind, 6, 6, 5);
    const auto& log = rec.log();
    for (std::size_t g = 1; g <= 5; ++g) {
      for (std::size_t i = 0; i < 6; ++i) {
        const Genotype& child = log[g * 6 + i].genotype;
        bool found = false;
        for (std::size_t j = 0; j < 6 && !found; ++j) {
          found = !single_step_violation(log[(g - 1) * 6 + j].genotype, child, kind);
        }
        EXPECT_TRUE(found) << "generation " << g << " child " << i;
      }
    }
  }
}

TEST(Evolve, ZeroGenerationsKeepsInitialBest) {
  const SmoothSurrogate smooth;
  const EvolutionTrace t = run(smooth, MutationKind::Learning, 2, 10, 0);
  EXPECT_EQ(t.best.size(), 1u);
  EXPECT_EQ(t.evaluations, 10u);
}

TEST(Evolve, PopulationOfOneIsConfigError) {
  const SmoothSurrogate smooth;
  EXPECT_THROW(run(smooth, MutationKind::Learning, 2, 1, 5), ConfigError);
}

TEST(Evolve, SmoothSurrogateImproves) {
  const SmoothSurrogate smooth;
  for (MutationKind kind : {MutationKind::Parameters, MutationKind::Learning}) {
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const EvolutionTrace t = run(smooth, kind, 100 + seed);
      improved += t.best.back().fitness.train_loss <= t.best.front().fitness.train_loss;
    }
    EXPECT_GE(improved, 9) << to_string(kind);
  }
}

TEST(Evolve, TestLossesNeverSteer) {
  const RuggedSurrogate rugged;
  CorruptTest corrupt(rugged);
  const EvolutionTrace a = run(rugged, MutationKind::Topology, 8);
  const EvolutionTrace b = run(corrupt, MutationKind::Topology, 8);
  for (std::size_t g = 0; g < a.best.size(); ++g) EXPECT_EQ(a.best[g].genotype, b.best[g].genotype);
}

}  // namespace
}  // namespace landlab
