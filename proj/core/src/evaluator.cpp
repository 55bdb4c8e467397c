#include "landlab/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "landlab/errors.hpp"
#include "landlab/network.hpp"

namespace landlab {

namespace {

/// Mean loss and accuracy over a whole image set, in inference mode.
std::pair<double, double> score_set(Network<float>& net, const ImageSet& set, std::size_t batch) {
  double loss = 0.0;
  std::size_t correct = 0;
  const std::size_t sz = set.image_size();
  for (std::size_t b0 = 0; b0 < set.count; b0 += batch) {
    const std::size_t nb = std::min(batch, set.count - b0);
    auto s = net.score(std::span<const float>(set.pixels).subspan(b0 * sz, nb * sz),
                       std::span<const int>(set.labels).subspan(b0, nb));
    loss += s.loss_sum;
    correct += s.correct;
  }
  const auto n = static_cast<double>(std::max<std::size_t>(set.count, 1));
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

FitnessPair train_and_score(const Phenotype& p, const DatasetSplit& data,
                            const TrainingSettings& settings, std::uint64_t seed) {
  if (settings.epochs < 1 || settings.batch < 1) {
    throw ConfigError("epochs and batch must be positive");
  }
  const ImageSet& train = data.train;
  if (Shape{train.height, train.width, train.channels} != p.input) {
    throw ConfigError("phenotype input shape does not match the data");
  }

  Rng rng(seed);
  Network<float> net(p, rng);
  Sgd<float> sgd(p.optimizer);
  auto params = net.parameters();

  const auto batch = static_cast<std::size_t>(settings.batch);
  const std::size_t sz = train.image_size();
  std::vector<std::size_t> order(train.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<float> images(batch * sz);
  std::vector<int> labels(batch);

  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b0 = 0; b0 < train.count; b0 += batch) {
      const std::size_t nb = std::min(batch, train.count - b0);
      for (std::size_t i = 0; i < nb; ++i) {
        const auto img = train.image(order[b0 + i]);
        std::copy(img.begin(), img.end(), images.begin() + static_cast<std::ptrdiff_t>(i * sz));
        labels[i] = train.labels[order[b0 + i]];
      }
      const float loss = net.compute_gradients(std::span<const float>(images).first(nb * sz),
                                               std::span<const int>(labels).first(nb), true, rng);
      if (!std::isfinite(loss)) return FitnessPair::penalty();
      sgd.step(params);
    }
  }

  const std::size_t eval_batch = std::max<std::size_t>(batch, 128);
  const auto [train_loss, train_acc] = score_set(net, train, eval_batch);
  const auto [test_loss, test_acc] = score_set(net, data.test, eval_batch);
  if (!std::isfinite(train_loss) || !std::isfinite(test_loss) || train_loss >= kPenaltyLoss ||
      test_loss >= kPenaltyLoss) {
    return FitnessPair::penalty();
  }
  return {train_loss, test_loss, train_acc, test_acc};
}

FitnessPair evaluate_cnn(const Genotype& g, const DatasetSplit& data, std::uint64_t seed,
                         const TrainingSettings& settings) {
  const Shape input{data.train.height, data.train.width, data.train.channels};
  auto decoded = decode(g, input, data.class_count);
  if (std::holds_alternative<ShapeInfeasible>(decoded)) return FitnessPair::penalty();
  return train_and_score(std::get<Phenotype>(decoded), data, settings, seed);
}

std::unique_ptr<FitnessEvaluator> make_evaluator(std::string_view name,
                                                 const TrainingSettings& settings) {
  if (name == "cnn") return std::make_unique<CnnEvaluator>(settings);
  if (name == "smooth") return std::make_unique<SmoothSurrogate>();
  if (name == "rugged") return std::make_unique<RuggedSurrogate>();
  throw ConfigError("unknown evaluator '" + std::string(name) + "' (expected cnn, smooth or rugged)");
}

}  // namespace landlab
