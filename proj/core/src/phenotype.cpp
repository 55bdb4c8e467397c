#include "landlab/phenotype.hpp"

#include "landlab/errors.hpp"

namespace landlab {

DecodeResult decode(const Genotype& g, Shape input, int class_count) {
  if (input.height < 1 || input.width < 1 || input.channels < 1) {
    throw ConfigError("input dimensions must be >= 1");
  }
  if (g.output.units() != class_count) {
    throw ConfigError("output gene has " + std::to_string(g.output.units()) + " units but data has " +
                      std::to_string(class_count) + " classes");
  }

  Phenotype p;
  p.input = input;
  p.class_count = class_count;
  p.optimizer = {g.optimizer.learning_rate, g.optimizer.decay, g.optimizer.momentum,
                 g.optimizer.nesterov};

  Shape cur = input;
  auto infeasible = [&](const char* what, int window) {
    return ShapeInfeasible{p.layers.size(),
                           std::string(what) + " window " + std::to_string(window) +
                               " does not fit " + std::to_string(cur.height) + "x" +
                               std::to_string(cur.width) + " input"};
  };

  for (const Gene& gene : g.layer_genes()) {
    Layer layer;
    layer.input = cur;
    switch (kind_of(gene)) {
      case GeneKind::Conv: {
        const auto& c = std::get<ConvGene>(gene);
        const int h = valid_extent(cur.height, c.kernel_size, c.stride);
        const int w = valid_extent(cur.width, c.kernel_size, c.stride);
        if (h < 1 || w < 1) return infeasible("conv", c.kernel_size);
        layer.spec = ConvLayer{c.filters, c.kernel_size, c.stride, c.activation, c.use_bias};
        cur = {h, w, c.filters};
        break;
      }
      case GeneKind::Pool: {
        const auto& c = std::get<PoolGene>(gene);
        const int h = valid_extent(cur.height, c.pool_size, c.stride);
        const int w = valid_extent(cur.width, c.pool_size, c.stride);
        if (h < 1 || w < 1) return infeasible("pool", c.pool_size);
        layer.spec = PoolLayer{c.type, c.pool_size, c.stride};
        cur = {h, w, cur.channels};
        break;
      }
      case GeneKind::Flatten:
        layer.spec = FlattenLayer{};
        cur = {1, 1, static_cast<int>(cur.size())};
        break;
      case GeneKind::Dense: {
        const auto& c = std::get<DenseGene>(gene);
        layer.spec = DenseLayer{c.units, c.activation, c.use_bias};
        cur = {1, 1, c.units};
        break;
      }
      case GeneKind::Dropout:
        layer.spec = DropoutLayer{std::get<DropoutGene>(gene).rate};
        break;
      case GeneKind::Output: {
        const auto& c = std::get<OutputGene>(gene);
        layer.spec = DenseLayer{c.units(), c.activation(), c.use_bias};
        cur = {1, 1, c.units()};
        break;
      }
      case GeneKind::Optimizer: continue;
    }
    layer.output = cur;
    p.layers.push_back(layer);
  }
  return p;
}

std::size_t Phenotype::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    if (const auto* c = std::get_if<ConvLayer>(&l.spec)) {
      n += static_cast<std::size_t>(c->filters) * c->kernel * c->kernel * l.input.channels +
           (c->use_bias ? c->filters : 0);
    } else if (const auto* d = std::get_if<DenseLayer>(&l.spec)) {
      n += static_cast<std::size_t>(d->units) * l.input.size() + (d->use_bias ? d->units : 0);
    }
  }
  return n;
}

std::uint64_t Phenotype::forward_macs() const {
  std::uint64_t n = 0;
  for (const auto& l : layers) {
    if (const auto* c = std::get_if<ConvLayer>(&l.spec)) {
      n += static_cast<std::uint64_t>(l.output.size()) * c->kernel * c->kernel * l.input.channels;
    } else if (const auto* d = std::get_if<DenseLayer>(&l.spec)) {
      n += static_cast<std::uint64_t>(d->units) * l.input.size();
    }
  }
  return n;
}

}  // namespace landlab
