#pragma once

// Gene grammar and genotype structure for grammar-encoded CNNs.
//
// A genotype is two ordered sections joined by a Flatten gene:
//   s1 (Conv / Pool)  ->  Flatten  ->  s2 (Dense / Dropout)  ->  Output
// plus one Optimizer gene holding the SGD settings. The Output gene is a
// dense softmax layer whose unit count equals the class count; only its
// bias flag can change after creation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "landlab/random.hpp"

namespace landlab {

enum class Activation { Relu, Elu, Sigmoid, Softmax };
enum class PoolType { Max, Avg };

std::string_view to_string(Activation a);
std::string_view to_string(PoolType p);
std::optional<Activation> parse_activation(std::string_view s);
std::optional<PoolType> parse_pool_type(std::string_view s);

enum class GeneKind { Conv, Pool, Dense, Dropout, Flatten, Output, Optimizer };

std::string_view to_string(GeneKind k);

struct ConvGene {
  int filters = 32;
  int kernel_size = 3;
  int stride = 1;
  Activation activation = Activation::Relu;
  bool use_bias = true;
  bool operator==(const ConvGene&) const = default;
};

struct PoolGene {
  PoolType type = PoolType::Max;
  int pool_size = 2;
  int stride = 1;
  bool operator==(const PoolGene&) const = default;
};

struct DenseGene {
  int units = 8;
  Activation activation = Activation::Relu;
  bool use_bias = true;
  bool operator==(const DenseGene&) const = default;
};

struct DropoutGene {
  double rate = 0.0;
  bool operator==(const DropoutGene&) const = default;
};

struct FlattenGene {
  bool operator==(const FlattenGene&) const = default;
};

/// Fixed softmax classifier layer. Units and activation are set at
/// construction and have no setters.
class OutputGene {
 public:
  OutputGene() = default;
  OutputGene(int units, bool use_bias, Activation activation = Activation::Softmax)
      : units_(units), activation_(activation), use_bias(use_bias) {}

  int units() const { return units_; }
  Activation activation() const { return activation_; }

  bool operator==(const OutputGene&) const = default;

 private:
  int units_ = 2;
  Activation activation_ = Activation::Softmax;

 public:
  bool use_bias = true;
};

struct OptimizerGene {
  double learning_rate = 1e-2;
  double decay = 1e-4;
  double momentum = 0.9;
  bool nesterov = false;
  bool operator==(const OptimizerGene&) const = default;
};

using Gene = std::variant<ConvGene, PoolGene, DenseGene, DropoutGene, FlattenGene, OutputGene,
                          OptimizerGene>;

GeneKind kind_of(const Gene& g);

/// Admissible values of every gene parameter.
struct Grammar {
  std::vector<int> conv_filters{32, 64, 128, 256};
  std::vector<int> conv_kernel_size{2, 3, 4, 5};
  std::vector<int> conv_stride{1, 2, 3};
  std::vector<Activation> conv_activation{Activation::Relu, Activation::Elu, Activation::Sigmoid};
  std::vector<PoolType> pool_type{PoolType::Max, PoolType::Avg};
  std::vector<int> pool_size{2, 3, 4, 5};
  std::vector<int> pool_stride{1, 2, 3};
  std::vector<int> dense_units{8, 16, 32, 64, 128, 256, 512};
  std::vector<Activation> dense_activation{Activation::Relu, Activation::Elu,
                                           Activation::Sigmoid};
  double dropout_min = 0.0;
  double dropout_max = 0.7;
  std::vector<double> learning_rate{1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> decay{1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> momentum{0.99, 0.9, 0.5, 0.1};

  static const Grammar& standard();

  /// Empty when the grammar is usable; otherwise one message per broken domain.
  std::vector<std::string> check() const;
};

/// Section-size bounds used by the generator and the topology operator.
struct SectionLimits {
  std::size_t min_s1 = 1;
  std::size_t max_s1 = 4;
  std::size_t min_s2 = 0;
  std::size_t max_s2 = 3;

  /// Throws ConfigError when min > max or min_s1 == 0.
  void require_valid() const;
};

struct Genotype {
  std::vector<Gene> s1;
  std::vector<Gene> s2;
  FlattenGene flatten;
  OutputGene output;
  OptimizerGene optimizer;
  std::uint64_t id = 0;

  std::size_t gene_count() const { return s1.size() + s2.size(); }

  /// Layer order of the decoded network: s1, flatten, s2, output.
  std::vector<Gene> layer_genes() const;

  bool operator==(const Genotype&) const = default;
};

/// Equality of everything except the lineage id.
bool same_structure(const Genotype& a, const Genotype& b);

// ---------------------------------------------------------------------------
// Parameter slots: a uniform view of gene parameters used by mutation,
// validation and the smooth surrogate.

enum class Param {
  Filters,
  KernelSize,
  Stride,
  Activation,
  UseBias,
  PoolType,
  PoolSize,
  Units,
  Rate,
  LearningRate,
  Decay,
  Momentum,
  Nesterov,
};

std::string_view to_string(Param p);

/// Parameters a mutation may change on a gene of this kind. For Output this
/// is only UseBias; Flatten has none.
std::span<const Param> mutable_params(GeneKind kind);

/// Number of admissible values; 0 for the continuous dropout rate.
std::size_t domain_size(const Grammar& grammar, GeneKind kind, Param p);

/// Index of the gene's current value in its domain, or nullopt when the
/// value is outside the grammar (or the parameter is continuous).
std::optional<std::size_t> domain_index(const Grammar& grammar, const Gene& gene, Param p);

/// Copy of `gene` with parameter `p` set to domain value `index`.
Gene with_domain_value(const Grammar& grammar, const Gene& gene, Param p, std::size_t index);

/// Continuous value of a Rate parameter.
double rate_of(const Gene& gene);

// ---------------------------------------------------------------------------

/// Fresh lineage id.
inline std::uint64_t next_genotype_id(Rng& rng) { return rng() | 1u; }

Gene random_gene(GeneKind kind, const Grammar& grammar, Rng& rng);
OptimizerGene random_optimizer(const Grammar& grammar, Rng& rng);

/// Uniformly drawn section sizes, kinds and parameter values. s1 always
/// holds at least one Conv gene.
Genotype random_genotype(const Grammar& grammar, int class_count, Rng& rng,
                         const SectionLimits& limits = {});

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate(const Genotype& g, const Grammar& grammar,
                          const SectionLimits& limits = {});

// Line-oriented text form; one gene per line as `kind key=value ...`.
std::string serialize(const Genotype& g);
/// Throws ParseError with line and column of the first problem.
Genotype deserialize(std::string_view text, const std::string& source = "<genotype>");
/// Reads consecutive genotype records (a genotype log).
std::vector<Genotype> deserialize_all(std::string_view text,
                                      const std::string& source = "<genotype log>");

/// Serialization without the id line; identical for structurally equal genotypes.
std::string canonical_text(const Genotype& g);

}  // namespace landlab
