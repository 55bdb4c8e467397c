#include "landlab/grammar.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "landlab/errors.hpp"

namespace landlab {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Elu: return "elu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

std::string_view to_string(PoolType p) { return p == PoolType::Max ? "max" : "avg"; }

std::optional<Activation> parse_activation(std::string_view s) {
  for (auto a : {Activation::Relu, Activation::Elu, Activation::Sigmoid, Activation::Softmax}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::optional<PoolType> parse_pool_type(std::string_view s) {
  if (s == "max") return PoolType::Max;
  if (s == "avg") return PoolType::Avg;
  return std::nullopt;
}

std::string_view to_string(GeneKind k) {
  switch (k) {
    case GeneKind::Conv: return "conv";
    case GeneKind::Pool: return "pool";
    case GeneKind::Dense: return "dense";
    case GeneKind::Dropout: return "dropout";
    case GeneKind::Flatten: return "flatten";
    case GeneKind::Output: return "output";
    case GeneKind::Optimizer: return "optimizer";
  }
  return "?";
}

std::string_view to_string(Param p) {
  switch (p) {
    case Param::Filters: return "filters";
    case Param::KernelSize: return "kernel_size";
    case Param::Stride: return "stride";
    case Param::Activation: return "activation";
    case Param::UseBias: return "use_bias";
    case Param::PoolType: return "type";
    case Param::PoolSize: return "pool_size";
    case Param::Units: return "units";
    case Param::Rate: return "rate";
    case Param::LearningRate: return "learning_rate";
    case Param::Decay: return "decay";
    case Param::Momentum: return "momentum";
    case Param::Nesterov: return "nesterov";
  }
  return "?";
}

GeneKind kind_of(const Gene& g) { return static_cast<GeneKind>(g.index()); }

const Grammar& Grammar::standard() {
  static const Grammar grammar{};
  return grammar;
}

namespace {

template <typename T>
void check_domain(std::vector<std::string>& out, std::string_view name, const std::vector<T>& d) {
  if (d.empty()) {
    out.push_back(std::string(name) + " domain is empty");
    return;
  }
  std::set<T> unique(d.begin(), d.end());
  if (unique.size() != d.size()) out.push_back(std::string(name) + " domain has duplicates");
}

template <typename T>
std::optional<std::size_t> index_in(const std::vector<T>& domain, const T& value) {
  auto it = std::find(domain.begin(), domain.end(), value);
  if (it == domain.end()) return std::nullopt;
  return static_cast<std::size_t>(it - domain.begin());
}

constexpr std::size_t bool_index(bool b) { return b ? 0 : 1; }  // domain order {true, false}
constexpr bool bool_value(std::size_t i) { return i == 0; }

constexpr std::array kConvParams{Param::Filters, Param::KernelSize, Param::Stride,
                                 Param::Activation, Param::UseBias};
constexpr std::array kPoolParams{Param::PoolType, Param::PoolSize, Param::Stride};
constexpr std::array kDenseParams{Param::Units, Param::Activation, Param::UseBias};
constexpr std::array kDropoutParams{Param::Rate};
constexpr std::array kOutputParams{Param::UseBias};
constexpr std::array kOptimizerParams{Param::LearningRate, Param::Decay, Param::Momentum,
                                      Param::Nesterov};

[[noreturn]] void bad_param(GeneKind kind, Param p) {
  throw ConfigError("gene kind '" + std::string(to_string(kind)) + "' has no parameter '" +
                    std::string(to_string(p)) + "'");
}

}  // namespace

std::vector<std::string> Grammar::check() const {
  std::vector<std::string> out;
  check_domain(out, "conv.filters", conv_filters);
  check_domain(out, "conv.kernel_size", conv_kernel_size);
  check_domain(out, "conv.stride", conv_stride);
  check_domain(out, "conv.activation", conv_activation);
  check_domain(out, "pool.type", pool_type);
  check_domain(out, "pool.pool_size", pool_size);
  check_domain(out, "pool.stride", pool_stride);
  check_domain(out, "dense.units", dense_units);
  check_domain(out, "dense.activation", dense_activation);
  check_domain(out, "optimizer.learning_rate", learning_rate);
  check_domain(out, "optimizer.decay", decay);
  check_domain(out, "optimizer.momentum", momentum);
  if (!(dropout_min <= dropout_max)) out.push_back("dropout.rate interval is empty");
  return out;
}

void SectionLimits::require_valid() const {
  if (min_s1 == 0) throw ConfigError("limits: min_s1 must be at least 1");
  if (min_s1 > max_s1) throw ConfigError("limits: min_s1 exceeds max_s1");
  if (min_s2 > max_s2) throw ConfigError("limits: min_s2 exceeds max_s2");
}

std::vector<Gene> Genotype::layer_genes() const {
  std::vector<Gene> out;
  out.reserve(s1.size() + s2.size() + 2);
  out.insert(out.end(), s1.begin(), s1.end());
  out.emplace_back(flatten);
  out.insert(out.end(), s2.begin(), s2.end());
  out.emplace_back(output);
  return out;
}

bool same_structure(const Genotype& a, const Genotype& b) {
  return a.s1 == b.s1 && a.s2 == b.s2 && a.flatten == b.flatten && a.output == b.output &&
         a.optimizer == b.optimizer;
}

std::span<const Param> mutable_params(GeneKind kind) {
  switch (kind) {
    case GeneKind::Conv: return kConvParams;
    case GeneKind::Pool: return kPoolParams;
    case GeneKind::Dense: return kDenseParams;
    case GeneKind::Dropout: return kDropoutParams;
    case GeneKind::Flatten: return {};
    case GeneKind::Output: return kOutputParams;
    case GeneKind::Optimizer: return kOptimizerParams;
  }
  return {};
}

std::size_t domain_size(const Grammar& g, GeneKind kind, Param p) {
  switch (kind) {
    case GeneKind::Conv:
      switch (p) {
        case Param::Filters: return g.conv_filters.size();
        case Param::KernelSize: return g.conv_kernel_size.size();
        case Param::Stride: return g.conv_stride.size();
        case Param::Activation: return g.conv_activation.size();
        case Param::UseBias: return 2;
        default: break;
      }
      break;
    case GeneKind::Pool:
      switch (p) {
        case Param::PoolType: return g.pool_type.size();
        case Param::PoolSize: return g.pool_size.size();
        case Param::Stride: return g.pool_stride.size();
        default: break;
      }
      break;
    case GeneKind::Dense:
      switch (p) {
        case Param::Units: return g.dense_units.size();
        case Param::Activation: return g.dense_activation.size();
        case Param::UseBias: return 2;
        default: break;
      }
      break;
    case GeneKind::Dropout:
      if (p == Param::Rate) return 0;
      break;
    case GeneKind::Output:
      if (p == Param::UseBias) return 2;
      break;
    case GeneKind::Optimizer:
      switch (p) {
        case Param::LearningRate: return g.learning_rate.size();
        case Param::Decay: return g.decay.size();
        case Param::Momentum: return g.momentum.size();
        case Param::Nesterov: return 2;
        default: break;
      }
      break;
    case GeneKind::Flatten: break;
  }
  bad_param(kind, p);
}

std::optional<std::size_t> domain_index(const Grammar& g, const Gene& gene, Param p) {
  const GeneKind kind = kind_of(gene);
  switch (kind) {
    case GeneKind::Conv: {
      const auto& c = std::get<ConvGene>(gene);
      switch (p) {
        case Param::Filters: return index_in(g.conv_filters, c.filters);
        case Param::KernelSize: return index_in(g.conv_kernel_size, c.kernel_size);
        case Param::Stride: return index_in(g.conv_stride, c.stride);
        case Param::Activation: return index_in(g.conv_activation, c.activation);
        case Param::UseBias: return bool_index(c.use_bias);
        default: break;
      }
      break;
    }
    case GeneKind::Pool: {
      const auto& c = std::get<PoolGene>(gene);
      switch (p) {
        case Param::PoolType: return index_in(g.pool_type, c.type);
        case Param::PoolSize: return index_in(g.pool_size, c.pool_size);
        case Param::Stride: return index_in(g.pool_stride, c.stride);
        default: break;
      }
      break;
    }
    case GeneKind::Dense: {
      const auto& c = std::get<DenseGene>(gene);
      switch (p) {
        case Param::Units: return index_in(g.dense_units, c.units);
        case Param::Activation: return index_in(g.dense_activation, c.activation);
        case Param::UseBias: return bool_index(c.use_bias);
        default: break;
      }
      break;
    }
    case GeneKind::Dropout:
      if (p == Param::Rate) return std::nullopt;
      break;
    case GeneKind::Output:
      if (p == Param::UseBias) return bool_index(std::get<OutputGene>(gene).use_bias);
      break;
    case GeneKind::Optimizer: {
      const auto& c = std::get<OptimizerGene>(gene);
      switch (p) {
        case Param::LearningRate: return index_in(g.learning_rate, c.learning_rate);
        case Param::Decay: return index_in(g.decay, c.decay);
        case Param::Momentum: return index_in(g.momentum, c.momentum);
        case Param::Nesterov: return bool_index(c.nesterov);
        default: break;
      }
      break;
    }
    case GeneKind::Flatten: break;
  }
  bad_param(kind, p);
}

Gene with_domain_value(const Grammar& g, const Gene& gene, Param p, std::size_t i) {
  Gene out = gene;
  const GeneKind kind = kind_of(gene);
  if (i >= domain_size(g, kind, p)) {
    throw ConfigError("domain index out of range for parameter '" + std::string(to_string(p)) + "'");
  }
  switch (kind) {
    case GeneKind::Conv: {
      auto& c = std::get<ConvGene>(out);
      if (p == Param::Filters) c.filters = g.conv_filters[i];
      else if (p == Param::KernelSize) c.kernel_size = g.conv_kernel_size[i];
      else if (p == Param::Stride) c.stride = g.conv_stride[i];
      else if (p == Param::Activation) c.activation = g.conv_activation[i];
      else c.use_bias = bool_value(i);
      break;
    }
    case GeneKind::Pool: {
      auto& c = std::get<PoolGene>(out);
      if (p == Param::PoolType) c.type = g.pool_type[i];
      else if (p == Param::PoolSize) c.pool_size = g.pool_size[i];
      else c.stride = g.pool_stride[i];
      break;
    }
    case GeneKind::Dense: {
      auto& c = std::get<DenseGene>(out);
      if (p == Param::Units) c.units = g.dense_units[i];
      else if (p == Param::Activation) c.activation = g.dense_activation[i];
      else c.use_bias = bool_value(i);
      break;
    }
    case GeneKind::Output: std::get<OutputGene>(out).use_bias = bool_value(i); break;
    case GeneKind::Optimizer: {
      auto& c = std::get<OptimizerGene>(out);
      if (p == Param::LearningRate) c.learning_rate = g.learning_rate[i];
      else if (p == Param::Decay) c.decay = g.decay[i];
      else if (p == Param::Momentum) c.momentum = g.momentum[i];
      else c.nesterov = bool_value(i);
      break;
    }
    case GeneKind::Dropout:
    case GeneKind::Flatten: bad_param(kind, p);
  }
  return out;
}

double rate_of(const Gene& gene) { return std::get<DropoutGene>(gene).rate; }

Gene random_gene(GeneKind kind, const Grammar& g, Rng& rng) {
  auto pick = [&rng](const auto& domain) { return domain[uniform_index(rng, domain.size())]; };
  switch (kind) {
    case GeneKind::Conv: {
      ConvGene c;
      c.filters = pick(g.conv_filters);
      c.kernel_size = pick(g.conv_kernel_size);
      c.stride = pick(g.conv_stride);
      c.activation = pick(g.conv_activation);
      c.use_bias = coin(rng);
      return c;
    }
    case GeneKind::Pool: {
      PoolGene c;
      c.type = pick(g.pool_type);
      c.pool_size = pick(g.pool_size);
      c.stride = pick(g.pool_stride);
      return c;
    }
    case GeneKind::Dense: {
      DenseGene c;
      c.units = pick(g.dense_units);
      c.activation = pick(g.dense_activation);
      c.use_bias = coin(rng);
      return c;
    }
    case GeneKind::Dropout: return DropoutGene{uniform_real(rng, g.dropout_min, g.dropout_max)};
    case GeneKind::Flatten: return FlattenGene{};
    case GeneKind::Optimizer: return random_optimizer(g, rng);
    case GeneKind::Output: break;
  }
  throw ConfigError("output genes are not drawn at random");
}

OptimizerGene random_optimizer(const Grammar& g, Rng& rng) {
  auto pick = [&rng](const auto& domain) { return domain[uniform_index(rng, domain.size())]; };
  OptimizerGene o;
  o.learning_rate = pick(g.learning_rate);
  o.decay = pick(g.decay);
  o.momentum = pick(g.momentum);
  o.nesterov = coin(rng);
  return o;
}

Genotype random_genotype(const Grammar& grammar, int class_count, Rng& rng,
                         const SectionLimits& limits) {
  if (class_count < 2) throw ConfigError("class_count must be at least 2");
  limits.require_valid();

  Genotype g;
  const std::size_t n1 = limits.min_s1 + uniform_index(rng, limits.max_s1 - limits.min_s1 + 1);
  const std::size_t n2 = limits.min_s2 + uniform_index(rng, limits.max_s2 - limits.min_s2 + 1);

  for (std::size_t i = 0; i < n1; ++i) {
    g.s1.push_back(random_gene(coin(rng) ? GeneKind::Pool : GeneKind::Conv, grammar, rng));
  }
  const bool has_conv = std::any_of(g.s1.begin(), g.s1.end(),
                                    [](const Gene& x) { return kind_of(x) == GeneKind::Conv; });
  if (!has_conv) {
    // Replace one uniformly chosen Pool gene so the feature section can learn.
    g.s1[uniform_index(rng, n1)] = random_gene(GeneKind::Conv, grammar, rng);
  }
  for (std::size_t i = 0; i < n2; ++i) {
    g.s2.push_back(random_gene(coin(rng) ? GeneKind::Dropout : GeneKind::Dense, grammar, rng));
  }
  g.output = OutputGene(class_count, coin(rng));
  g.optimizer = random_optimizer(grammar, rng);
  g.id = next_genotype_id(rng);
  return g;
}

namespace {

void check_gene_domains(const Grammar& grammar, const Gene& gene, const std::string& where,
                        std::vector<std::string>& out) {
  const GeneKind kind = kind_of(gene);
  for (Param p : mutable_params(kind)) {
    if (p == Param::Rate) {
      const double r = rate_of(gene);
      if (!(r >= grammar.dropout_min && r <= grammar.dropout_max)) {
        out.push_back("value outside grammar domain: " + where + ".rate");
      }
      continue;
    }
    if (!domain_index(grammar, gene, p)) {
      out.push_back("value outside grammar domain: " + where + "." + std::string(to_string(p)));
    }
  }
}

}  // namespace

ValidationResult validate(const Genotype& g, const Grammar& grammar, const SectionLimits& limits) {
  ValidationResult r;
  auto& v = r.violations;

  bool has_conv = false;
  for (std::size_t i = 0; i < g.s1.size(); ++i) {
    const GeneKind k = kind_of(g.s1[i]);
    const std::string where = "s1[" + std::to_string(i) + "]";
    if (k == GeneKind::Conv) has_conv = true;
    if (k != GeneKind::Conv && k != GeneKind::Pool) {
      v.push_back("gene kind not allowed in s1: " + where + " is " + std::string(to_string(k)));
      continue;
    }
    check_gene_domains(grammar, g.s1[i], where, v);
  }
  if (!has_conv) v.push_back("s1 lacks Conv gene");

  for (std::size_t i = 0; i < g.s2.size(); ++i) {
    const GeneKind k = kind_of(g.s2[i]);
    const std::string where = "s2[" + std::to_string(i) + "]";
    if (k != GeneKind::Dense && k != GeneKind::Dropout) {
      v.push_back("gene kind not allowed in s2: " + where + " is " + std::string(to_string(k)));
      continue;
    }
    check_gene_domains(grammar, g.s2[i], where, v);
  }

  if (g.s1.size() > limits.max_s1) v.push_back("s1 exceeds max_s1");
  if (g.s2.size() > limits.max_s2) v.push_back("s2 exceeds max_s2");

  if (g.output.activation() != Activation::Softmax) v.push_back("output activation is not softmax");
  if (g.output.units() < 2) v.push_back("output units below 2");

  check_gene_domains(grammar, g.optimizer, "optimizer", v);
  return r;
}

}  // namespace landlab
