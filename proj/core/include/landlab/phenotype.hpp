#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "landlab/grammar.hpp"

namespace landlab {

struct Shape {
  int height = 1;
  int width = 1;
  int channels = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  bool operator==(const Shape&) const = default;
};

struct ConvLayer {
  int filters;
  int kernel;
  int stride;
  Activation activation;
  bool use_bias;
};

struct PoolLayer {
  PoolType type;
  int size;
  int stride;
};

struct FlattenLayer {};

/// Fully connected layer. The final layer of every phenotype is a DenseLayer
/// with Softmax activation; its outputs are treated as logits by the loss.
struct DenseLayer {
  int units;
  Activation activation;
  bool use_bias;
};

struct DropoutLayer {
  double rate;
};

using LayerSpec = std::variant<ConvLayer, PoolLayer, FlattenLayer, DenseLayer, DropoutLayer>;

struct Layer {
  LayerSpec spec;
  Shape input;
  Shape output;
};

struct SgdSettings {
  double learning_rate = 1e-2;
  double decay = 0.0;
  double momentum = 0.0;
  bool nesterov = false;
};

struct Phenotype {
  Shape input;
  int class_count = 0;
  std::vector<Layer> layers;
  SgdSettings optimizer;

  std::size_t parameter_count() const;
  /// Multiply-accumulates of one forward pass for a single image.
  std::uint64_t forward_macs() const;
};

struct ShapeInfeasible {
  std::size_t layer_index;
  std::string reason;
};

using DecodeResult = std::variant<Phenotype, ShapeInfeasible>;

/// Valid (unpadded) output extent: floor((in - window) / stride) + 1, or
/// a value below 1 when the window does not fit.
constexpr int valid_extent(int in, int window, int stride) {
  return in < window ? 0 : (in - window) / stride + 1;
}

/// Maps a genotype to a layer chain with resolved shapes. Returns
/// ShapeInfeasible when a window no longer fits its input.
DecodeResult decode(const Genotype& g, Shape input, int class_count);

}  // namespace landlab
