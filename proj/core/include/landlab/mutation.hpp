#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "landlab/grammar.hpp"

namespace landlab {

/// The neighbourhood that defines a landscape. One kind per experiment.
enum class MutationKind { Topology, Parameters, Learning };

std::string_view to_string(MutationKind k);
std::optional<MutationKind> parse_mutation_kind(std::string_view s);

enum class TopologyAction { Add, Delete };
enum class Section { S1, S2 };

/// Forces the first draw of the topology operator; blocked moves are still
/// re-routed. Exposed for tests.
struct TopologyHint {
  std::optional<TopologyAction> action;
  std::optional<Section> section;
};

/// Inserts or deletes exactly one gene in s1 or s2. Flatten, Output and
/// Optimizer genes are never touched. Throws OperatorError when every move
/// is blocked by the section limits.
Genotype mutate_topology(const Genotype& g, const Grammar& grammar, Rng& rng,
                         const SectionLimits& limits = {}, const TopologyHint& hint = {});

/// Resamples one parameter of one non-Flatten, non-Optimizer gene to a
/// different domain value. The Output gene can only flip its bias.
Genotype mutate_parameters(const Genotype& g, const Grammar& grammar, Rng& rng);

/// Resamples one Optimizer field to a different domain value.
Genotype mutate_learning(const Genotype& g, const Grammar& grammar, Rng& rng);

/// Mutation rate is 1: every call returns a changed genotype with a fresh id.
Genotype mutate(const Genotype& g, MutationKind kind, const Grammar& grammar, Rng& rng,
                const SectionLimits& limits = {});

/// Why `child` is not one application of `kind` to `parent`, or nullopt when
/// it is. Used to re-check logged walks.
std::optional<std::string> single_step_violation(const Genotype& parent, const Genotype& child,
                                                 MutationKind kind);

}  // namespace landlab
