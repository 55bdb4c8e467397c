#pragma once

// Small CNN engine: forward/backward passes for the layer chain of a
// Phenotype, softmax + sparse categorical cross-entropy, and SGD with
// momentum, Nesterov momentum and inverse-time learning-rate decay.
//
// Images are passed as N x H x W x C buffers (channel fastest).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "landlab/phenotype.hpp"
#include "landlab/random.hpp"

namespace landlab {

template <typename Scalar>
struct ParameterBlock {
  std::span<Scalar> values;
  std::span<Scalar> gradients;
};

template <typename Scalar>
struct BatchScore {
  double loss_sum = 0.0;  // sum of per-sample cross-entropy
  std::size_t correct = 0;
  std::size_t count = 0;
};

template <typename Scalar>
class Network {
 public:
  /// Glorot-uniform weights, zero biases.
  Network(const Phenotype& phenotype, Rng& init_rng);
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;
  ~Network();

  int class_count() const;
  std::size_t input_size() const;

  /// Class probabilities, column-major classes x count.
  std::vector<Scalar> predict(std::span<const Scalar> images, std::size_t count);

  /// Inference-mode loss and accuracy on a batch.
  BatchScore<Scalar> score(std::span<const Scalar> images, std::span<const int> labels);

  /// Mean cross-entropy of the batch. Overwrites every gradient buffer.
  /// Dropout is active only when `training` is true.
  Scalar compute_gradients(std::span<const Scalar> images, std::span<const int> labels,
                           bool training, Rng& dropout_rng);

  /// Views into the trainable tensors in layer order (weights then bias).
  std::vector<ParameterBlock<Scalar>> parameters();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Stochastic gradient descent; learning rate at update t is
/// lr / (1 + decay * t) with t counting completed updates.
template <typename Scalar>
class Sgd {
 public:
  explicit Sgd(SgdSettings settings) : settings_(settings) {}

  void step(std::vector<ParameterBlock<Scalar>>& params);

  double current_learning_rate() const {
    return settings_.learning_rate / (1.0 + settings_.decay * static_cast<double>(iterations_));
  }
  std::size_t iterations() const { return iterations_; }

 private:
  SgdSettings settings_;
  std::size_t iterations_ = 0;
  std::vector<std::vector<Scalar>> velocity_;
};

extern template class Network<float>;
extern template class Network<double>;
extern template class Sgd<float>;
extern template class Sgd<double>;

}  // namespace landlab
