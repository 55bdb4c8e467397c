#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "landlab/data.hpp"
#include "landlab/grammar.hpp"
#include "landlab/phenotype.hpp"

namespace landlab {

/// Loss assigned to shape-infeasible or diverged networks.
inline constexpr double kPenaltyLoss = 1e9;

struct FitnessPair {
  double train_loss = 0.0;  // the fitness, minimised
  double test_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;

  static FitnessPair penalty() { return {kPenaltyLoss, kPenaltyLoss, 0.0, 0.0}; }
  bool is_penalty() const { return train_loss >= kPenaltyLoss; }
  bool operator==(const FitnessPair&) const = default;
};

/// True when `a` has strictly better training fitness than `b`. Penalised
/// pairs lose against every finite loss.
inline bool fitter(const FitnessPair& a, const FitnessPair& b) {
  if (a.is_penalty() != b.is_penalty()) return b.is_penalty();
  return a.train_loss < b.train_loss;
}

struct TrainingSettings {
  int epochs = 8;
  int batch = 64;
};

/// Maps a genotype to its fitness pair. Implementations are stateless and
/// deterministic in (genotype, data, seed).
class FitnessEvaluator {
 public:
  virtual ~FitnessEvaluator() = default;
  virtual FitnessPair evaluate(const Genotype& g, const DatasetSplit& data,
                               std::uint64_t seed) const = 0;
  virtual std::string_view name() const = 0;
};

/// Xavier init, mini-batch SGD with the phenotype's optimizer settings,
/// then mean cross-entropy over the full train and test sets.
FitnessPair train_and_score(const Phenotype& p, const DatasetSplit& data,
                            const TrainingSettings& settings, std::uint64_t seed);

/// decode + train_and_score; infeasible genotypes get the penalty.
FitnessPair evaluate_cnn(const Genotype& g, const DatasetSplit& data, std::uint64_t seed,
                         const TrainingSettings& settings = {});

class CnnEvaluator final : public FitnessEvaluator {
 public:
  explicit CnnEvaluator(TrainingSettings settings = {}) : settings_(settings) {}
  FitnessPair evaluate(const Genotype& g, const DatasetSplit& data,
                       std::uint64_t seed) const override {
    return evaluate_cnn(g, data, seed, settings_);
  }
  std::string_view name() const override { return "cnn"; }

 private:
  TrainingSettings settings_;
};

// ---------------------------------------------------------------------------
// Surrogate landscapes. They ignore the data and seed and exist to exercise
// the walk and measure machinery with known landscape character.

/// Weighted L1 distance between parameter assignments. Genes are matched
/// per kind in order (i-th Conv against i-th Conv, ...); discrete values
/// contribute |index difference| times the parameter weight, dropout rates
/// their absolute difference, and per-kind gene counts their difference.
class SmoothSurrogate final : public FitnessEvaluator {
 public:
  static constexpr std::size_t kParamCount = 13;

  SmoothSurrogate();
  explicit SmoothSurrogate(Genotype target);

  double distance(const Genotype& g) const;
  FitnessPair evaluate(const Genotype& g) const;
  FitnessPair evaluate(const Genotype& g, const DatasetSplit&, std::uint64_t) const override {
    return evaluate(g);
  }
  std::string_view name() const override { return "smooth"; }

  const Genotype& target() const { return target_; }
  double weight(Param p) const { return weights_[static_cast<std::size_t>(p)]; }
  void set_weight(Param p, double w) { weights_[static_cast<std::size_t>(p)] = w; }
  double count_weight() const { return count_weight_; }

  /// Fixed target used by the default surrogate, for `class_count` outputs.
  static Genotype default_target(int class_count);

 private:
  Genotype target_;
  std::array<double, kParamCount> weights_;
  double count_weight_ = 1.0;
};

/// Stable hash of the canonical genotype text mapped to [0, 1).
class RuggedSurrogate final : public FitnessEvaluator {
 public:
  FitnessPair evaluate(const Genotype& g) const;
  FitnessPair evaluate(const Genotype& g, const DatasetSplit&, std::uint64_t) const override {
    return evaluate(g);
  }
  std::string_view name() const override { return "rugged"; }
};

FitnessPair evaluate_smooth_surrogate(const Genotype& g);
FitnessPair evaluate_rugged_surrogate(const Genotype& g);

/// FNV-1a over the bytes, finalised with splitmix64.
std::uint64_t stable_hash(std::string_view bytes, std::uint64_t salt = 0);
/// Top 53 bits of a hash as a double in [0, 1).
double unit_interval(std::uint64_t h);

/// Backend by name: "cnn", "smooth" or "rugged". Throws ConfigError otherwise.
std::unique_ptr<FitnessEvaluator> make_evaluator(std::string_view name,
                                                 const TrainingSettings& settings = {});

}  // namespace landlab
