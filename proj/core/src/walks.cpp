#include "landlab/walks.hpp"

#include "landlab/errors.hpp"

namespace landlab {

std::vector<double> WalkTrace::train_series() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.fitness.train_loss);
  return out;
}

std::vector<double> WalkTrace::test_series() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.fitness.test_loss);
  return out;
}

WalkTrace selective_walk(const Genotype& start, const WalkSettings& settings,
                         const FitnessEvaluator& evaluator, const DatasetSplit& data, Rng& rng,
                         const Grammar& grammar) {
  if (settings.neighbors < 1) throw ConfigError("walk needs at least one neighbour per step");
  if (settings.length < 1) throw ConfigError("walk length must be at least 1");

  WalkTrace trace;
  trace.settings = settings;
  trace.dataset = data.name;
  trace.steps.reserve(settings.length + 1);
  trace.steps.push_back({start, evaluator.evaluate(start, data, rng())});
  trace.evaluations = 1;

  for (std::size_t t = 1; t <= settings.length; ++t) {
    const Genotype& current = trace.steps.back().genotype;
    std::vector<ScoredGenotype> sample;
    sample.reserve(settings.neighbors);
    std::size_t best = 0;
    for (std::size_t j = 0; j < settings.neighbors; ++j) {
      Genotype neighbour = mutate(current, settings.kind, grammar, rng, settings.limits);
      FitnessPair f = evaluator.evaluate(neighbour, data, rng());
      ++trace.evaluations;
      sample.push_back({std::move(neighbour), f});
      if (fitter(sample.back().fitness, sample[best].fitness)) best = j;
    }
    trace.steps.push_back(sample[best]);
    trace.chosen.push_back(best);
    trace.candidates.push_back(std::move(sample));
  }
  return trace;
}

EvolutionTrace evolve(const EvolutionSettings& settings, const FitnessEvaluator& evaluator,
                      const DatasetSplit& data, Rng& rng, const Grammar& grammar) {
  if (settings.population < 2) {
    throw ConfigError("population must be at least 2 for tournament selection");
  }
  if (settings.tournament < 1) throw ConfigError("tournament size must be at least 1");

  EvolutionTrace trace;
  trace.settings = settings;
  trace.dataset = data.name;

  std::vector<ScoredGenotype> pop;
  pop.reserve(settings.population);
  for (std::size_t i = 0; i < settings.population; ++i) {
    Genotype g = random_genotype(grammar, data.class_count, rng, settings.limits);
    FitnessPair f = evaluator.evaluate(g, data, rng());
    pop.push_back({std::move(g), f});
    ++trace.evaluations;
  }

  auto record_best = [&] {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
      if (fitter(pop[i].fitness, pop[best].fitness)) best = i;
    }
    trace.best.push_back(pop[best]);
  };
  record_best();

  for (std::size_t gen = 1; gen <= settings.generations; ++gen) {
    std::vector<ScoredGenotype> next;
    next.reserve(settings.population);
    for (std::size_t i = 0; i < settings.population; ++i) {
      std::size_t winner = uniform_index(rng, pop.size());
      for (std::size_t j = 1; j < settings.tournament; ++j) {
        const std::size_t rival = uniform_index(rng, pop.size());
        if (fitter(pop[rival].fitness, pop[winner].fitness)) winner = rival;
      }
      Genotype child = mutate(pop[winner].genotype, settings.kind, grammar, rng, settings.limits);
      FitnessPair f = evaluator.evaluate(child, data, rng());
      next.push_back({std::move(child), f});
      ++trace.evaluations;
    }
    pop = std::move(next);
    record_best();
  }
  return trace;
}

}  // namespace landlab
