#pragma once

// Experiment configuration and the per-configuration protocol: for every
// (dataset, mutation kind) pair, independent selective walks and
// independent evolution runs, each persisted under
//   <out>/<dataset>/<mutation>/{walks,evolution}/

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "landlab/data.hpp"
#include "landlab/evaluator.hpp"
#include "landlab/walks.hpp"

namespace landlab {

enum class DataSource { Idx, Synthetic, None };

struct DatasetConfig {
  std::string name = "synthetic";
  DataSource source = DataSource::Synthetic;
  // IDX source. With only images/labels set, train and test are drawn from
  // that single pool; with test_images/test_labels set, each pool is
  // subsampled separately.
  std::filesystem::path images, labels, test_images, test_labels;
  std::size_t train_n = 2000;
  std::size_t test_n = 1000;
  int class_count = 0;  // 0: infer from labels (IDX) or use `classes`
  // Synthetic source.
  int classes = 10;
  std::size_t per_class = 100;
  int height = 28;
  int width = 28;
  int channels = 1;
};

struct MeasureSettings {
  std::vector<std::size_t> steps{1, 2, 3, 4};
  double threshold = 0.15;
  bool emr_on_test = false;
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::string evaluator = "cnn";
  std::vector<MutationKind> mutations{MutationKind::Learning, MutationKind::Parameters,
                                      MutationKind::Topology};
  std::vector<DatasetConfig> datasets;
  std::size_t walks = 10;
  std::size_t walk_length = 30;
  std::size_t neighbors = 3;
  std::size_t runs = 10;
  std::size_t population = 10;
  std::size_t generations = 20;
  std::size_t tournament = 2;
  TrainingSettings training;
  SectionLimits limits;
  MeasureSettings measures;
};

/// Parses a JSON configuration document. Every omitted field takes its
/// default. Relative dataset paths resolve against `base_dir`. Throws
/// ConfigError with the offending field path.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Checks ranges and that dataset files exist. Throws ConfigError.
void validate_config(const ExperimentConfig& config);

/// Split for one run. `seed` selects the subsample (or the synthetic draw).
DatasetSplit build_split(const DatasetConfig& d, const RawDataset* pool, const RawDataset* test_pool,
                         std::uint64_t seed);

struct RunOptions {
  std::filesystem::path out = "out";
  unsigned jobs = 1;
  bool walks = true;
  bool evolution = true;
  std::function<void(const std::string&)> log;
};

struct RunTiming {
  std::string file;
  double seconds = 0.0;
};

struct ConfigurationResult {
  std::string dataset;
  MutationKind kind = MutationKind::Learning;
  std::filesystem::path dir;
  std::vector<WalkTrace> walks;
  std::vector<EvolutionTrace> runs;
  std::vector<RunTiming> timings;  // in dispatch order
};

/// Runs every configuration, writing trace files, a manifest.json per
/// configuration and timings.json. Trace files depend only on the config.
std::vector<ConfigurationResult> run_experiment(const ExperimentConfig& config,
                                                const RunOptions& options);

std::filesystem::path configuration_dir(const std::filesystem::path& out, std::string_view dataset,
                                        MutationKind kind);

}  // namespace landlab
