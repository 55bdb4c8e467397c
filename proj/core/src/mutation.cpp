#include "landlab/mutation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "landlab/errors.hpp"

namespace landlab {

std::string_view to_string(MutationKind k) {
  switch (k) {
    case MutationKind::Topology: return "topology";
    case MutationKind::Parameters: return "parameters";
    case MutationKind::Learning: return "learning";
  }
  return "?";
}

std::optional<MutationKind> parse_mutation_kind(std::string_view s) {
  for (auto k : {MutationKind::Topology, MutationKind::Parameters, MutationKind::Learning}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

namespace {

bool is_conv(const Gene& g) { return kind_of(g) == GeneKind::Conv; }

/// Positions of s1 whose removal keeps at least one Conv gene.
std::vector<std::size_t> deletable_s1(const std::vector<Gene>& s1) {
  const auto convs = static_cast<std::size_t>(std::count_if(s1.begin(), s1.end(), is_conv));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    if (!is_conv(s1[i]) || convs > 1) out.push_back(i);
  }
  return out;
}

struct Move {
  TopologyAction action;
  Section section;
};

bool legal(const Genotype& g, const SectionLimits& limits, Move m) {
  const auto& sec = m.section == Section::S1 ? g.s1 : g.s2;
  const std::size_t lo = m.section == Section::S1 ? limits.min_s1 : limits.min_s2;
  const std::size_t hi = m.section == Section::S1 ? limits.max_s1 : limits.max_s2;
  if (m.action == TopologyAction::Add) return sec.size() < hi;
  if (sec.size() <= lo) return false;
  return m.section == Section::S2 || !deletable_s1(sec).empty();
}

TopologyAction other(TopologyAction a) {
  return a == TopologyAction::Add ? TopologyAction::Delete : TopologyAction::Add;
}
Section other(Section s) { return s == Section::S1 ? Section::S2 : Section::S1; }

Gene resample_parameter(const Gene& gene, Param p, const Grammar& grammar, Rng& rng) {
  const GeneKind kind = kind_of(gene);
  if (p == Param::Rate) {
    const double old = rate_of(gene);
    double r = old;
    while (std::abs(r - old) <= 1e-9) r = uniform_real(rng, grammar.dropout_min, grammar.dropout_max);
    return DropoutGene{r};
  }
  const std::size_t n = domain_size(grammar, kind, p);
  const auto current = domain_index(grammar, gene, p);
  if (n < 2 || !current) {
    throw OperatorError("parameter '" + std::string(to_string(p)) +
                        "' cannot be changed within its domain");
  }
  return with_domain_value(grammar, gene, p, uniform_index_except(rng, n, *current));
}

}  // namespace

Genotype mutate_topology(const Genotype& g, const Grammar& grammar, Rng& rng,
                         const SectionLimits& limits, const TopologyHint& hint) {
  const TopologyAction action =
      hint.action.value_or(coin(rng) ? TopologyAction::Delete : TopologyAction::Add);
  const Section section = hint.section.value_or(coin(rng) ? Section::S2 : Section::S1);

  const std::array<Move, 4> order{Move{action, section}, Move{other(action), section},
                                  Move{action, other(section)},
                                  Move{other(action), other(section)}};
  const auto it = std::find_if(order.begin(), order.end(),
                               [&](Move m) { return legal(g, limits, m); });
  if (it == order.end()) throw OperatorError("no legal topology move within section limits");

  Genotype out = g;
  auto& sec = it->section == Section::S1 ? out.s1 : out.s2;
  if (it->action == TopologyAction::Add) {
    const std::size_t pos = uniform_index(rng, sec.size() + 1);
    GeneKind kind;
    if (it->section == Section::S1) {
      kind = coin(rng) ? GeneKind::Pool : GeneKind::Conv;
    } else {
      kind = coin(rng) ? GeneKind::Dropout : GeneKind::Dense;
    }
    sec.insert(sec.begin() + static_cast<std::ptrdiff_t>(pos), random_gene(kind, grammar, rng));
  } else {
    std::size_t pos;
    if (it->section == Section::S1) {
      const auto candidates = deletable_s1(sec);
      pos = candidates[uniform_index(rng, candidates.size())];
    } else {
      pos = uniform_index(rng, sec.size());
    }
    sec.erase(sec.begin() + static_cast<std::ptrdiff_t>(pos));
  }
  return out;
}

Genotype mutate_parameters(const Genotype& g, const Grammar& grammar, Rng& rng) {
  Genotype out = g;
  // Eligible genes: every s1 and s2 gene plus the output layer.
  const std::size_t total = g.s1.size() + g.s2.size() + 1;
  const std::size_t pick = uniform_index(rng, total);
  if (pick == total - 1) {
    out.output.use_bias = !out.output.use_bias;
    return out;
  }
  Gene& gene = pick < g.s1.size() ? out.s1[pick] : out.s2[pick - g.s1.size()];
  const auto params = mutable_params(kind_of(gene));
  const Param p = params[uniform_index(rng, params.size())];
  gene = resample_parameter(gene, p, grammar, rng);
  return out;
}

Genotype mutate_learning(const Genotype& g, const Grammar& grammar, Rng& rng) {
  Genotype out = g;
  const auto params = mutable_params(GeneKind::Optimizer);
  const Param p = params[uniform_index(rng, params.size())];
  out.optimizer = std::get<OptimizerGene>(resample_parameter(g.optimizer, p, grammar, rng));
  return out;
}

Genotype mutate(const Genotype& g, MutationKind kind, const Grammar& grammar, Rng& rng,
                const SectionLimits& limits) {
  Genotype out;
  switch (kind) {
    case MutationKind::Topology: out = mutate_topology(g, grammar, rng, limits); break;
    case MutationKind::Parameters: out = mutate_parameters(g, grammar, rng); break;
    case MutationKind::Learning: out = mutate_learning(g, grammar, rng); break;
  }
  out.id = next_genotype_id(rng);
  return out;
}

namespace {

/// Raw value of a parameter as a comparable number.
double field_value(const Gene& gene, Param p) {
  return std::visit(
      [p](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ConvGene>) {
          switch (p) {
            case Param::Filters: return g.filters;
            case Param::KernelSize: return g.kernel_size;
            case Param::Stride: return g.stride;
            case Param::Activation: return static_cast<int>(g.activation);
            default: return g.use_bias;
          }
        } else if constexpr (std::is_same_v<T, PoolGene>) {
          switch (p) {
            case Param::PoolType: return static_cast<int>(g.type);
            case Param::PoolSize: return g.pool_size;
            default: return g.stride;
          }
        } else if constexpr (std::is_same_v<T, DenseGene>) {
          switch (p) {
            case Param::Units: return g.units;
            case Param::Activation: return static_cast<int>(g.activation);
            default: return g.use_bias;
          }
        } else if constexpr (std::is_same_v<T, DropoutGene>) {
          return g.rate;
        } else if constexpr (std::is_same_v<T, OutputGene>) {
          return g.use_bias;
        } else if constexpr (std::is_same_v<T, OptimizerGene>) {
          switch (p) {
            case Param::LearningRate: return g.learning_rate;
            case Param::Decay: return g.decay;
            case Param::Momentum: return g.momentum;
            default: return g.nesterov;
          }
        } else {
          return 0.0;
        }
      },
      gene);
}

/// Number of parameter fields in which two genes of the same kind differ.
std::size_t field_delta(const Gene& a, const Gene& b) {
  if (a == b) return 0;
  const GeneKind kind = kind_of(a);
  std::size_t n = 0;
  if (kind == GeneKind::Output) {
    const auto& x = std::get<OutputGene>(a);
    const auto& y = std::get<OutputGene>(b);
    n += (x.units() != y.units()) + (x.activation() != y.activation());
  }
  for (Param p : mutable_params(kind)) n += field_value(a, p) != field_value(b, p);
  return n;
}

bool is_one_deletion(const std::vector<Gene>& longer, const std::vector<Gene>& shorter) {
  if (longer.size() != shorter.size() + 1) return false;
  std::size_t i = 0;
  while (i < shorter.size() && longer[i] == shorter[i]) ++i;
  return std::equal(shorter.begin() + static_cast<std::ptrdiff_t>(i), shorter.end(),
                    longer.begin() + static_cast<std::ptrdiff_t>(i) + 1);
}

}  // namespace

std::optional<std::string> single_step_violation(const Genotype& parent, const Genotype& child,
                                                 MutationKind kind) {
  if (!(parent.flatten == child.flatten)) return "flatten gene changed";
  if (parent.output.units() != child.output.units() ||
      parent.output.activation() != child.output.activation()) {
    return "output units or activation changed";
  }

  switch (kind) {
    case MutationKind::Learning: {
      if (parent.s1 != child.s1 || parent.s2 != child.s2 || !(parent.output == child.output)) {
        return "learning mutation touched a non-optimizer gene";
      }
      if (field_delta(parent.optimizer, child.optimizer) != 1) {
        return "learning mutation must change exactly one optimizer field";
      }
      return std::nullopt;
    }
    case MutationKind::Parameters: {
      if (!(parent.optimizer == child.optimizer)) return "parameter mutation touched the optimizer";
      if (parent.s1.size() != child.s1.size() || parent.s2.size() != child.s2.size()) {
        return "parameter mutation changed the topology";
      }
      std::size_t changed_fields = 0;
      auto scan = [&](const std::vector<Gene>& a, const std::vector<Gene>& b) -> bool {
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (kind_of(a[i]) != kind_of(b[i])) return false;
          changed_fields += field_delta(a[i], b[i]);
        }
        return true;
      };
      if (!scan(parent.s1, child.s1) || !scan(parent.s2, child.s2)) {
        return "parameter mutation changed a gene kind";
      }
      changed_fields += field_delta(parent.output, child.output);
      if (changed_fields != 1) return "parameter mutation must change exactly one field";
      return std::nullopt;
    }
    case MutationKind::Topology: {
      if (!(parent.optimizer == child.optimizer) || !(parent.output == child.output)) {
        return "topology mutation touched the output or optimizer gene";
      }
      const bool s1_same = parent.s1 == child.s1;
      const bool s2_same = parent.s2 == child.s2;
      if (s1_same == s2_same) return "topology mutation must change exactly one section";
      const auto& a = s1_same ? parent.s2 : parent.s1;
      const auto& b = s1_same ? child.s2 : child.s1;
      if (!is_one_deletion(a, b) && !is_one_deletion(b, a)) {
        return "topology mutation must insert or delete exactly one gene";
      }
      return std::nullopt;
    }
  }
  return "unknown mutation kind";
}

}  // namespace landlab
