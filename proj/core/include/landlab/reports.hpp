#pragma once

// Measures over persisted walk traces and the report files derived from
// them. For a configuration directory <dataset>/<mutation>/ the reports go
// to its measures/ subdirectory:
//
//   autocorrelation.csv  config,split,k,walk_id,value
//   boxplots.csv         config,split,k,count,min,q1,median,q3,max,undefined,classification
//   entropy.csv          config,split,epsilon_fraction,walk_id,epsilon,value
//   summary.json
//
// and the trace root receives rf_table.csv (datasets x mutation kinds) and
// summary.json over all configurations.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "landlab/experiment.hpp"
#include "landlab/measures.hpp"

namespace landlab {

struct ConfigurationMeasures {
  std::string dataset;
  std::string mutation;  // "learning", "parameters", "topology" or a directory name
  std::filesystem::path dir;
  std::size_t walk_count = 0;
  AutocorrelationReport autocorrelation;
  EntropyReport entropy_train;
  std::optional<EntropyReport> entropy_test;

  std::string label() const { return dataset + "/" + mutation; }
};

/// Reads walk_*.csv under `walks_dir` as train and test series.
std::vector<FitnessSeries> read_walk_series(const std::filesystem::path& walks_dir);

ConfigurationMeasures measure_walks(std::span<const FitnessSeries> series,
                                    const MeasureSettings& settings);

/// Finds every walks/ directory below `root` and measures it. Throws
/// ConfigError when there are none.
std::vector<ConfigurationMeasures> measure_tree(const std::filesystem::path& root,
                                                const MeasureSettings& settings);

std::string autocorrelation_csv(const ConfigurationMeasures& m);
std::string boxplots_csv(const ConfigurationMeasures& m);
std::string entropy_csv(const ConfigurationMeasures& m);
std::string summary_json(const ConfigurationMeasures& m);
std::string rf_table_csv(std::span<const ConfigurationMeasures> all);

/// Writes the per-configuration reports and the root tables, reading each
/// CSV back. Returns the files written.
std::vector<std::filesystem::path> write_reports(std::span<const ConfigurationMeasures> all,
                                                 const std::filesystem::path& root);

/// Generic table reader used to read reports back.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws MeasureError if absent
};
CsvTable read_csv_table(const std::filesystem::path& path);

}  // namespace landlab
