#include <cmath>

#include "landlab/evaluator.hpp"

namespace landlab {

std::uint64_t stable_hash(std::string_view bytes, std::uint64_t salt) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ salt;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

double unit_interval(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

namespace {

constexpr std::uint64_t kTestSalt = 0x7465737473706c74ULL;

std::vector<const Gene*> genes_of(const Genotype& g, GeneKind kind) {
  std::vector<const Gene*> out;
  for (const auto* sec : {&g.s1, &g.s2}) {
    for (const auto& gene : *sec) {
      if (kind_of(gene) == kind) out.push_back(&gene);
    }
  }
  return out;
}

}  // namespace

Genotype SmoothSurrogate::default_target(int class_count) {
  Genotype t;
  t.s1 = {ConvGene{64, 3, 1, Activation::Relu, true}, PoolGene{PoolType::Max, 2, 2},
          ConvGene{128, 3, 1, Activation::Elu, true}};
  t.s2 = {DenseGene{128, Activation::Relu, true}, DropoutGene{0.35}};
  t.output = OutputGene(class_count, true);
  t.optimizer = {1e-3, 1e-4, 0.9, true};
  return t;
}

SmoothSurrogate::SmoothSurrogate() : SmoothSurrogate(default_target(10)) {}

SmoothSurrogate::SmoothSurrogate(Genotype target) : target_(std::move(target)) {
  weights_.fill(1.0);
}

double SmoothSurrogate::distance(const Genotype& g) const {
  const Grammar& grammar = Grammar::standard();
  auto gene_distance = [&](const Gene& a, const Gene& b) {
    double d = 0.0;
    for (Param p : mutable_params(kind_of(a))) {
      if (p == Param::Rate) {
        d += weight(p) * std::abs(rate_of(a) - rate_of(b));
        continue;
      }
      const auto ia = domain_index(grammar, a, p);
      const auto ib = domain_index(grammar, b, p);
      if (ia && ib) {
        d += weight(p) * std::abs(static_cast<double>(*ia) - static_cast<double>(*ib));
      } else if (ia != ib) {
        // Outside the grammar: treat as maximally distant within the domain.
        d += weight(p) * static_cast<double>(domain_size(grammar, kind_of(a), p));
      }
    }
    return d;
  };

  double total = 0.0;
  for (GeneKind kind : {GeneKind::Conv, GeneKind::Pool, GeneKind::Dense, GeneKind::Dropout}) {
    const auto mine = genes_of(g, kind);
    const auto theirs = genes_of(target_, kind);
    const std::size_t common = std::min(mine.size(), theirs.size());
    for (std::size_t i = 0; i < common; ++i) total += gene_distance(*mine[i], *theirs[i]);
    total += count_weight_ * std::abs(static_cast<double>(mine.size()) -
                                      static_cast<double>(theirs.size()));
  }
  total += gene_distance(g.output, target_.output);
  total += gene_distance(g.optimizer, target_.optimizer);
  return total;
}

FitnessPair SmoothSurrogate::evaluate(const Genotype& g) const {
  const double train = distance(g);
  const double noise = 0.05 * unit_interval(stable_hash(canonical_text(g), kTestSalt));
  const double test = train + noise;
  return {train, test, 1.0 / (1.0 + train), 1.0 / (1.0 + test)};
}

FitnessPair RuggedSurrogate::evaluate(const Genotype& g) const {
  const std::string text = canonical_text(g);
  const double train = unit_interval(stable_hash(text));
  const double test = unit_interval(stable_hash(text, kTestSalt));
  return {train, test, 1.0 - train, 1.0 - test};
}

FitnessPair evaluate_smooth_surrogate(const Genotype& g) {
  static const SmoothSurrogate surrogate;
  return surrogate.evaluate(g);
}

FitnessPair evaluate_rugged_surrogate(const Genotype& g) { return RuggedSurrogate{}.evaluate(g); }

}  // namespace landlab
