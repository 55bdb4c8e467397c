#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "landlab/evaluator.hpp"
#include "landlab/mutation.hpp"

namespace landlab {

struct WalkSettings {
  MutationKind kind = MutationKind::Parameters;
  std::size_t length = 30;    // n: steps after the start solution
  std::size_t neighbors = 3;  // m: neighbours sampled per step
  SectionLimits limits;
};

struct ScoredGenotype {
  Genotype genotype;
  FitnessPair fitness;
};

struct WalkTrace {
  WalkSettings settings;
  std::string dataset;
  std::uint64_t seed = 0;
  std::vector<ScoredGenotype> steps;                    // s_0 .. s_n
  std::vector<std::vector<ScoredGenotype>> candidates;  // candidates[t-1]: the m neighbours of step t
  std::vector<std::size_t> chosen;                      // chosen[t-1]: index into candidates[t-1]
  std::size_t evaluations = 0;                          // including s_0

  std::size_t neighbor_evaluations() const { return evaluations == 0 ? 0 : evaluations - 1; }
  std::vector<double> train_series() const;
  std::vector<double> test_series() const;
};

/// Walk of `length` steps from `start`; each step moves to the neighbour
/// with the best training fitness among `neighbors` independent mutations
/// of the current solution (first generated wins ties). Test fitness is
/// recorded but never consulted.
WalkTrace selective_walk(const Genotype& start, const WalkSettings& settings,
                         const FitnessEvaluator& evaluator, const DatasetSplit& data, Rng& rng,
                         const Grammar& grammar = Grammar::standard());

struct EvolutionSettings {
  MutationKind kind = MutationKind::Parameters;
  std::size_t population = 10;
  std::size_t generations = 20;
  std::size_t tournament = 2;
  SectionLimits limits;
};

struct EvolutionTrace {
  EvolutionSettings settings;
  std::string dataset;
  std::uint64_t seed = 0;
  std::vector<ScoredGenotype> best;  // best[g]: best individual of generation g (0 = initial)
  std::size_t evaluations = 0;
};

/// Generational loop without elitism or crossover: every offspring is a
/// mutation of a tournament winner (uniform draws with replacement).
EvolutionTrace evolve(const EvolutionSettings& settings, const FitnessEvaluator& evaluator,
                      const DatasetSplit& data, Rng& rng,
                      const Grammar& grammar = Grammar::standard());

}  // namespace landlab
