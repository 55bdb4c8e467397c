#include "landlab/network.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "landlab/errors.hpp"

namespace landlab {

namespace {

// Activations of a spatial layer are stored as a channels x (batch*H*W)
// matrix. Eigen is column-major, so each column holds the channels of one
// pixel contiguously and the memory order matches NHWC image buffers.
// Dense activations are features x batch.
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Upper bound on im2col buffer elements; larger batches are processed in chunks.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

template <typename T>
void activate(Eigen::Ref<Mat<T>> z, Activation a) {
  switch (a) {
    case Activation::Relu: z = z.cwiseMax(T(0)); break;
    case Activation::Elu:
      z = (z.array() > T(0)).select(z.array(), z.array().exp() - T(1)).matrix();
      break;
    case Activation::Sigmoid: z = (T(1) / (T(1) + (-z.array()).exp())).matrix(); break;
    case Activation::Softmax: break;  // logits; the loss applies softmax
  }
}

/// dZ = dA * f'(Z), written in terms of the activation output A.
template <typename T>
void activation_backward(const Eigen::Ref<const Mat<T>>& out, Eigen::Ref<Mat<T>> grad,
                         Activation a) {
  switch (a) {
    case Activation::Relu:
      grad = (out.array() > T(0)).select(grad.array(), T(0)).matrix();
      break;
    case Activation::Elu:
      grad = (out.array() > T(0)).select(grad.array(), grad.array() * (out.array() + T(1))).matrix();
      break;
    case Activation::Sigmoid:
      grad = (grad.array() * out.array() * (T(1) - out.array())).matrix();
      break;
    case Activation::Softmax: break;
  }
}

template <typename T>
void glorot(Mat<T>& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<T>(u(rng));
  }
}

template <typename T>
struct LayerImpl {
  virtual ~LayerImpl() = default;
  virtual void forward(const Mat<T>& in, Mat<T>& out, std::size_t batch, bool training,
                       Rng& rng) = 0;
  /// `grad_out` may be modified in place. `grad_in` is written only when
  /// `need_grad_in` is true.
  virtual void backward(const Mat<T>& in, const Mat<T>& out, Mat<T>& grad_out, Mat<T>& grad_in,
                        std::size_t batch, bool need_grad_in) = 0;
  virtual void collect(std::vector<ParameterBlock<T>>&) {}
};

template <typename T>
class ConvImpl final : public LayerImpl<T> {
 public:
  ConvImpl(const ConvLayer& spec, Shape in, Shape out, Rng& rng)
      : spec_(spec), in_(in), out_(out), patch_(spec.kernel * spec.kernel * in.channels) {
    weights_.resize(spec.filters, patch_);
    glorot(weights_, patch_, static_cast<std::size_t>(spec.kernel * spec.kernel * spec.filters),
           rng);
    weight_grad_ = Mat<T>::Zero(spec.filters, patch_);
    if (spec.use_bias) {
      bias_ = Mat<T>::Zero(spec.filters, 1);
      bias_grad_ = Mat<T>::Zero(spec.filters, 1);
    }
  }

  void forward(const Mat<T>& in, Mat<T>& out, std::size_t batch, bool, Rng&) override {
    const std::size_t opix = static_cast<std::size_t>(out_.height) * out_.width;
    out.resize(spec_.filters, static_cast<Eigen::Index>(batch * opix));
    const std::size_t chunk = chunk_size(batch, opix);
    for (std::size_t b0 = 0; b0 < batch; b0 += chunk) {
      const std::size_t nb = std::min(chunk, batch - b0);
      im2col(in, b0, nb);
      auto block = out.middleCols(static_cast<Eigen::Index>(b0 * opix),
                                  static_cast<Eigen::Index>(nb * opix));
      block.noalias() = weights_ * cols_.leftCols(static_cast<Eigen::Index>(nb * opix));
      // bias and activation while the block is still in cache
      if (spec_.use_bias) block.colwise() += bias_.col(0);
      activate<T>(block, spec_.activation);
    }
  }

  void backward(const Mat<T>& in, const Mat<T>& out, Mat<T>& grad_out, Mat<T>& grad_in,
                std::size_t batch, bool need_grad_in) override {
    const std::size_t opix = static_cast<std::size_t>(out_.height) * out_.width;
    weight_grad_.setZero();
    if (spec_.use_bias) bias_grad_.setZero();
    if (need_grad_in) grad_in = Mat<T>::Zero(in.rows(), in.cols());
    const std::size_t chunk = chunk_size(batch, opix);
    for (std::size_t b0 = 0; b0 < batch; b0 += chunk) {
      const std::size_t nb = std::min(chunk, batch - b0);
      const auto ncols = static_cast<Eigen::Index>(nb * opix);
      const auto first = static_cast<Eigen::Index>(b0 * opix);
      auto g = grad_out.middleCols(first, ncols);
      activation_backward<T>(out.middleCols(first, ncols), g, spec_.activation);
      if (spec_.use_bias) bias_grad_ += g.rowwise().sum();
      im2col(in, b0, nb);
      weight_grad_.noalias() += g * cols_.leftCols(ncols).transpose();
      if (need_grad_in) {
        cols_.leftCols(ncols).noalias() = weights_.transpose() * g;
        col2im(grad_in, b0, nb);
      }
    }
  }

  void collect(std::vector<ParameterBlock<T>>& out) override {
    out.push_back({{weights_.data(), static_cast<std::size_t>(weights_.size())},
                   {weight_grad_.data(), static_cast<std::size_t>(weight_grad_.size())}});
    if (spec_.use_bias) {
      out.push_back({{bias_.data(), static_cast<std::size_t>(bias_.size())},
                     {bias_grad_.data(), static_cast<std::size_t>(bias_grad_.size())}});
    }
  }

 private:
  std::size_t chunk_size(std::size_t batch, std::size_t opix) const {
    const std::size_t per_image = opix * static_cast<std::size_t>(patch_);
    return std::clamp<std::size_t>(kColumnBudget / std::max<std::size_t>(per_image, 1), 1, batch);
  }

  // Patch row order is (ky, kx, channel) with channel fastest, matching both
  // the input memory layout and the weight column order.
  void im2col(const Mat<T>& in, std::size_t b0, std::size_t nb) {
    const int k = spec_.kernel;
    const int s = spec_.stride;
    const int c = in_.channels;
    const std::size_t ipix = static_cast<std::size_t>(in_.height) * in_.width;
    const std::size_t opix = static_cast<std::size_t>(out_.height) * out_.width;
    if (static_cast<std::size_t>(cols_.cols()) < nb * opix || cols_.rows() != patch_) {
      cols_.resize(patch_, static_cast<Eigen::Index>(nb * opix));
    }
    const T* src = in.data();
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t ibase = (b0 + b) * ipix;
      for (int oy = 0; oy < out_.height; ++oy) {
        for (int ox = 0; ox < out_.width; ++ox) {
          T* dst = cols_.data() + (b * opix + static_cast<std::size_t>(oy) * out_.width + ox) *
                                      static_cast<std::size_t>(patch_);
          for (int ky = 0; ky < k; ++ky) {
            const std::size_t row = ibase + static_cast<std::size_t>(oy * s + ky) * in_.width +
                                    static_cast<std::size_t>(ox * s);
            std::copy_n(src + row * c, static_cast<std::size_t>(k) * c, dst);
            dst += static_cast<std::size_t>(k) * c;
          }
        }
      }
    }
  }

  void col2im(Mat<T>& grad_in, std::size_t b0, std::size_t nb) const {
    const int k = spec_.kernel;
    const int s = spec_.stride;
    const int c = in_.channels;
    const std::size_t ipix = static_cast<std::size_t>(in_.height) * in_.width;
    const std::size_t opix = static_cast<std::size_t>(out_.height) * out_.width;
    T* dst = grad_in.data();
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t ibase = (b0 + b) * ipix;
      for (int oy = 0; oy < out_.height; ++oy) {
        for (int ox = 0; ox < out_.width; ++ox) {
          const T* src = cols_.data() + (b * opix + static_cast<std::size_t>(oy) * out_.width + ox) *
                                            static_cast<std::size_t>(patch_);
          for (int ky = 0; ky < k; ++ky) {
            const std::size_t row = ibase + static_cast<std::size_t>(oy * s + ky) * in_.width +
                                    static_cast<std::size_t>(ox * s);
            T* d = dst + row * c;
            for (int j = 0; j < k * c; ++j) d[j] += src[j];
            src += static_cast<std::size_t>(k) * c;
          }
        }
      }
    }
  }

  ConvLayer spec_;
  Shape in_;
  Shape out_;
  Eigen::Index patch_;
  Mat<T> weights_, weight_grad_, bias_, bias_grad_;
  Mat<T> cols_;
};

template <typename T>
class PoolImpl final : public LayerImpl<T> {
 public:
  PoolImpl(const PoolLayer& spec, Shape in, Shape out) : spec_(spec), in_(in), out_(out) {}

  void forward(const Mat<T>& in, Mat<T>& out, std::size_t batch, bool, Rng&) override {
    const int c = in_.channels;
    const int k = spec_.size;
    const int s = spec_.stride;
    const std::size_t ipix = static_cast<std::size_t>(in_.height) * in_.width;
    const std::size_t opix = static_cast<std::size_t>(out_.height) * out_.width;
    out.resize(c, static_cast<Eigen::Index>(batch * opix));
    const bool is_max = spec_.type == PoolType::Max;
    if (is_max) argmax_.assign(static_cast<std::size_t>(out.size()), 0);
    const T inv = T(1) / static_cast<T>(k * k);
    for (std::size_t b = 0; b < batch; ++b) {
      for (int oy = 0; oy < out_.height; ++oy) {
        for (int ox = 0; ox < out_.width; ++ox) {
          const std::size_t ocol = b * opix + static_cast<std::size_t>(oy) * out_.width + ox;
          T* o = out.data() + ocol * c;
          std::size_t* arg = is_max ? argmax_.data() + ocol * c : nullptr;
          for (int ch = 0; ch < c; ++ch) {
            o[ch] = is_max ? -std::numeric_limits<T>::infinity() : T(0);
          }
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const std::size_t icol = b * ipix +
                                       static_cast<std::size_t>(oy * s + ky) * in_.width +
                                       static_cast<std::size_t>(ox * s + kx);
              const T* src = in.data() + icol * c;
              if (is_max) {
                for (int ch = 0; ch < c; ++ch) {
                  if (src[ch] > o[ch]) {
                    o[ch] = src[ch];
                    arg[ch] = icol * c + ch;
                  }
                }
              } else {
                for (int ch = 0; ch < c; ++ch) o[ch] += src[ch];
              }
            }
          }
          if (!is_max) {
            for (int ch = 0; ch < c; ++ch) o[ch] *= inv;
          }
        }
      }
    }
  }

  void backward(const Mat<T>& in, const Mat<T>&, Mat<T>& grad_out, Mat<T>& grad_in,
                std::size_t batch, bool need_grad_in) override {
    if (!need_grad_in) return;
    grad_in = Mat<T>::Zero(in.rows(), in.cols());
    const int c = in_.channels;
    if (spec_.type == PoolType::Max) {
      const T* g = grad_out.data();
      for (std::size_t i = 0; i < argmax_.size(); ++i) grad_in.data()[argmax_[i]] += g[i];
      return;
    }
    const int k = spec_.size;
    const int s = spec_.stride;
    const std::size_t ipix = static_cast<std::size_t>(in_.height) * in_.width;
    const std::size_t opix = static_cast<std::size_t>(out_.height) * out_.width;
    const T inv = T(1) / static_cast<T>(k * k);
    for (std::size_t b = 0; b < batch; ++b) {
      for (int oy = 0; oy < out_.height; ++oy) {
        for (int ox = 0; ox < out_.width; ++ox) {
          const std::size_t ocol = b * opix + static_cast<std::size_t>(oy) * out_.width + ox;
          const T* g = grad_out.data() + ocol * c;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const std::size_t icol = b * ipix +
                                       static_cast<std::size_t>(oy * s + ky) * in_.width +
                                       static_cast<std::size_t>(ox * s + kx);
              T* d = grad_in.data() + icol * c;
              for (int ch = 0; ch < c; ++ch) d[ch] += g[ch] * inv;
            }
          }
        }
      }
    }
  }

 private:
  PoolLayer spec_;
  Shape in_;
  Shape out_;
  std::vector<std::size_t> argmax_;
};

template <typename T>
class FlattenImpl final : public LayerImpl<T> {
 public:
  explicit FlattenImpl(Shape in) : in_(in) {}

  void forward(const Mat<T>& in, Mat<T>& out, std::size_t batch, bool, Rng&) override {
    out = Eigen::Map<const Mat<T>>(in.data(), static_cast<Eigen::Index>(in_.size()),
                                   static_cast<Eigen::Index>(batch));
  }

  void backward(const Mat<T>& in, const Mat<T>&, Mat<T>& grad_out, Mat<T>& grad_in, std::size_t,
                bool need_grad_in) override {
    if (!need_grad_in) return;
    grad_in = Eigen::Map<const Mat<T>>(grad_out.data(), in.rows(), in.cols());
  }

 private:
  Shape in_;
};

template <typename T>
class DenseImpl final : public LayerImpl<T> {
 public:
  DenseImpl(const DenseLayer& spec, Shape in, Rng& rng) : spec_(spec) {
    const auto fan_in = static_cast<Eigen::Index>(in.size());
    weights_.resize(spec.units, fan_in);
    glorot(weights_, static_cast<std::size_t>(fan_in), static_cast<std::size_t>(spec.units), rng);
    weight_grad_ = Mat<T>::Zero(spec.units, fan_in);
    if (spec.use_bias) {
      bias_ = Mat<T>::Zero(spec.units, 1);
      bias_grad_ = Mat<T>::Zero(spec.units, 1);
    }
  }

  void forward(const Mat<T>& in, Mat<T>& out, std::size_t, bool, Rng&) override {
    out.noalias() = weights_ * in;
    if (spec_.use_bias) out.colwise() += bias_.col(0);
    activate<T>(out, spec_.activation);
  }

  void backward(const Mat<T>& in, const Mat<T>& out, Mat<T>& grad_out, Mat<T>& grad_in,
                std::size_t, bool need_grad_in) override {
    activation_backward<T>(out, grad_out, spec_.activation);
    weight_grad_.noalias() = grad_out * in.transpose();
    if (spec_.use_bias) bias_grad_ = grad_out.rowwise().sum();
    if (need_grad_in) grad_in.noalias() = weights_.transpose() * grad_out;
  }

  void collect(std::vector<ParameterBlock<T>>& out) override {
    out.push_back({{weights_.data(), static_cast<std::size_t>(weights_.size())},
                   {weight_grad_.data(), static_cast<std::size_t>(weight_grad_.size())}});
    if (spec_.use_bias) {
      out.push_back({{bias_.data(), static_cast<std::size_t>(bias_.size())},
                     {bias_grad_.data(), static_cast<std::size_t>(bias_grad_.size())}});
    }
  }

 private:
  DenseLayer spec_;
  Mat<T> weights_, weight_grad_, bias_, bias_grad_;
};

/// Inverted dropout: kept units are scaled by 1/(1-rate) during training;
/// identity at inference.
template <typename T>
class DropoutImpl final : public LayerImpl<T> {
 public:
  explicit DropoutImpl(double rate) : rate_(rate) {}

  void forward(const Mat<T>& in, Mat<T>& out, std::size_t, bool training, Rng& rng) override {
    active_ = training && rate_ > 0.0;
    if (!active_) {
      out = in;
      return;
    }
    const T scale = static_cast<T>(1.0 / (1.0 - rate_));
    std::bernoulli_distribution keep(1.0 - rate_);
    mask_.resize(in.rows(), in.cols());
    for (Eigen::Index i = 0; i < mask_.size(); ++i) mask_.data()[i] = keep(rng) ? scale : T(0);
    out = in.cwiseProduct(mask_);
  }

  void backward(const Mat<T>&, const Mat<T>&, Mat<T>& grad_out, Mat<T>& grad_in, std::size_t,
                bool need_grad_in) override {
    if (!need_grad_in) return;
    if (active_) {
      grad_in = grad_out.cwiseProduct(mask_);
    } else {
      grad_in = grad_out;
    }
  }

 private:
  double rate_;
  bool active_ = false;
  Mat<T> mask_;
};

}  // namespace

template <typename Scalar>
struct Network<Scalar>::Impl {
  Shape input;
  int classes = 0;
  std::vector<std::unique_ptr<LayerImpl<Scalar>>> layers;
  std::vector<Mat<Scalar>> acts;  // acts[0] = input, acts[i+1] = output of layer i
  Mat<Scalar> grad_a, grad_b;

  void load(std::span<const Scalar> images, std::size_t count) {
    if (images.size() != count * input.size()) {
      throw ConfigError("image buffer does not match batch size and input shape");
    }
    acts.resize(layers.size() + 1);
    acts[0] = Eigen::Map<const Mat<Scalar>>(images.data(), input.channels,
                                            static_cast<Eigen::Index>(count * input.height *
                                                                      input.width));
  }

  const Mat<Scalar>& forward(std::size_t count, bool training, Rng& rng) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i]->forward(acts[i], acts[i + 1], count, training, rng);
    }
    return acts.back();
  }
};

template <typename Scalar>
Network<Scalar>::Network(const Phenotype& p, Rng& rng) : impl_(std::make_unique<Impl>()) {
  impl_->input = p.input;
  impl_->classes = p.class_count;
  for (const auto& layer : p.layers) {
    std::unique_ptr<LayerImpl<Scalar>> l;
    std::visit(
        [&](const auto& spec) {
          using S = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<S, ConvLayer>) {
            l = std::make_unique<ConvImpl<Scalar>>(spec, layer.input, layer.output, rng);
          } else if constexpr (std::is_same_v<S, PoolLayer>) {
            l = std::make_unique<PoolImpl<Scalar>>(spec, layer.input, layer.output);
          } else if constexpr (std::is_same_v<S, FlattenLayer>) {
            l = std::make_unique<FlattenImpl<Scalar>>(layer.input);
          } else if constexpr (std::is_same_v<S, DenseLayer>) {
            l = std::make_unique<DenseImpl<Scalar>>(spec, layer.input, rng);
          } else {
            l = std::make_unique<DropoutImpl<Scalar>>(spec.rate);
          }
        },
        layer.spec);
    impl_->layers.push_back(std::move(l));
  }
}

template <typename Scalar>
Network<Scalar>::Network(Network&&) noexcept = default;
template <typename Scalar>
Network<Scalar>& Network<Scalar>::operator=(Network&&) noexcept = default;
template <typename Scalar>
Network<Scalar>::~Network() = default;

template <typename Scalar>
int Network<Scalar>::class_count() const {
  return impl_->classes;
}

template <typename Scalar>
std::size_t Network<Scalar>::input_size() const {
  return impl_->input.size();
}

namespace {

/// Column-wise log-sum-exp of logits.
template <typename T>
Eigen::Matrix<T, 1, Eigen::Dynamic> log_sum_exp(const Mat<T>& z) {
  const auto m = z.colwise().maxCoeff().eval();
  return (m.array() + (z.rowwise() - m).array().exp().colwise().sum().log()).matrix();
}

}  // namespace

template <typename Scalar>
std::vector<Scalar> Network<Scalar>::predict(std::span<const Scalar> images, std::size_t count) {
  Rng unused(0);
  impl_->load(images, count);
  const Mat<Scalar>& z = impl_->forward(count, false, unused);
  const auto lse = log_sum_exp(z);
  Mat<Scalar> p = (z.rowwise() - lse).array().exp().matrix();
  return {p.data(), p.data() + p.size()};
}

template <typename Scalar>
BatchScore<Scalar> Network<Scalar>::score(std::span<const Scalar> images,
                                          std::span<const int> labels) {
  Rng unused(0);
  const std::size_t count = labels.size();
  impl_->load(images, count);
  const Mat<Scalar>& z = impl_->forward(count, false, unused);
  const auto lse = log_sum_exp(z);
  BatchScore<Scalar> s;
  s.count = count;
  for (std::size_t b = 0; b < count; ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    s.loss_sum += static_cast<double>(lse(col) - z(labels[b], col));
    Eigen::Index arg = 0;
    z.col(col).maxCoeff(&arg);
    s.correct += arg == labels[b];
  }
  return s;
}

template <typename Scalar>
Scalar Network<Scalar>::compute_gradients(std::span<const Scalar> images,
                                          std::span<const int> labels, bool training, Rng& rng) {
  auto& im = *impl_;
  const std::size_t count = labels.size();
  im.load(images, count);
  const Mat<Scalar>& z = im.forward(count, training, rng);
  const auto lse = log_sum_exp(z);

  double loss = 0.0;
  // d(mean CE)/dz = (softmax - onehot) / batch
  im.grad_a = (z.rowwise() - lse).array().exp().matrix();
  for (std::size_t b = 0; b < count; ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    loss += static_cast<double>(lse(col) - z(labels[b], col));
    im.grad_a(labels[b], col) -= Scalar(1);
  }
  im.grad_a /= static_cast<Scalar>(count);

  for (std::size_t i = im.layers.size(); i-- > 0;) {
    im.layers[i]->backward(im.acts[i], im.acts[i + 1], im.grad_a, im.grad_b, count, i > 0);
    if (i > 0) std::swap(im.grad_a, im.grad_b);
  }
  return static_cast<Scalar>(loss / static_cast<double>(count));
}

template <typename Scalar>
std::vector<ParameterBlock<Scalar>> Network<Scalar>::parameters() {
  std::vector<ParameterBlock<Scalar>> out;
  for (auto& l : impl_->layers) l->collect(out);
  return out;
}

template <typename Scalar>
void Sgd<Scalar>::step(std::vector<ParameterBlock<Scalar>>& params) {
  if (velocity_.size() != params.size()) {
    velocity_.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) velocity_[i].assign(params[i].values.size(), 0);
  }
  const auto lr = static_cast<Scalar>(current_learning_rate());
  const auto mu = static_cast<Scalar>(settings_.momentum);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].values;
    auto g = params[i].gradients;
    auto& v = velocity_[i];
    if (settings_.nesterov) {
      for (std::size_t j = 0; j < w.size(); ++j) {
        v[j] = mu * v[j] - lr * g[j];
        w[j] += mu * v[j] - lr * g[j];
      }
    } else {
      for (std::size_t j = 0; j < w.size(); ++j) {
        v[j] = mu * v[j] - lr * g[j];
        w[j] += v[j];
      }
    }
  }
  ++iterations_;
}

template class Network<float>;
template class Network<double>;
template class Sgd<float>;
template class Sgd<double>;

}  // namespace landlab
