#include "landlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "landlab/errors.hpp"
#include "landlab/trace_io.hpp"

namespace landlab {

namespace {

using nlohmann::json;

class Fields {
 public:
  Fields(const json& obj, std::string path, std::set<std::string> allowed)
      : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
      if (!allowed.count(key)) throw ConfigError(at(key) + ": unknown field");
    }
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  bool has(const std::string& key) const { return obj_.contains(key); }
  const json& raw(const std::string& key) const { return obj_.at(key); }

  template <class T>
  void integer(const std::string& key, T& out, long long lo) const {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    const long long x = v.get<long long>();
    if (x < lo) throw ConfigError(at(key) + ": must be at least " + std::to_string(lo));
    out = static_cast<T>(x);
  }

  void seed(const std::string& key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(at(key) + ": expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void real(const std::string& key, double& out) const {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    out = v.get<double>();
  }

  void boolean(const std::string& key, bool& out) const {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key) + ": expected true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    out = v.get<std::string>();
  }

  void path(const std::string& key, std::filesystem::path& out,
            const std::filesystem::path& base) const {
    std::string s;
    string(key, s);
    if (s.empty()) return;
    std::filesystem::path p(s);
    out = p.is_relative() && !base.empty() ? base / p : p;
  }

 private:
  const json& obj_;
  std::string path_;
};

DatasetConfig parse_dataset(const json& j, const std::string& where,
                            const std::filesystem::path& base) {
  Fields f(j, where,
           {"name", "source", "images", "labels", "test_images", "test_labels", "train_n",
            "test_n", "class_count", "classes", "per_class", "height", "width", "channels"});
  DatasetConfig d;
  std::string source = "synthetic";
  f.string("source", source);
  if (source == "idx") {
    d.source = DataSource::Idx;
    d.name = "idx";
  } else if (source == "synthetic") {
    d.source = DataSource::Synthetic;
  } else if (source == "none") {
    d.source = DataSource::None;
    d.name = "none";
  } else {
    throw ConfigError(f.at("source") + ": expected \"idx\", \"synthetic\" or \"none\", got \"" +
                      source + "\"");
  }
  f.string("name", d.name);
  if (d.name.empty() || d.name.find_first_of("/\\") != std::string::npos || d.name == "." ||
      d.name == "..") {
    throw ConfigError(f.at("name") + ": must be a plain directory name");
  }
  f.path("images", d.images, base);
  f.path("labels", d.labels, base);
  f.path("test_images", d.test_images, base);
  f.path("test_labels", d.test_labels, base);
  f.integer("train_n", d.train_n, 1);
  f.integer("test_n", d.test_n, 1);
  f.integer("class_count", d.class_count, 0);
  f.integer("classes", d.classes, 2);
  f.integer("per_class", d.per_class, 1);
  f.integer("height", d.height, 1);
  f.integer("width", d.width, 1);
  f.integer("channels", d.channels, 1);
  if (d.source == DataSource::Idx) {
    if (d.images.empty()) throw ConfigError(f.at("images") + ": required for idx datasets");
    if (d.labels.empty()) throw ConfigError(f.at("labels") + ": required for idx datasets");
    if (d.test_images.empty() != d.test_labels.empty()) {
      throw ConfigError(f.at("test_images") + ": test_images and test_labels go together");
    }
  }
  return d;
}

std::string seed_stream(std::string_view what, std::string_view dataset, MutationKind kind) {
  std::string s(what);
  s += '/';
  s += dataset;
  s += '/';
  s += to_string(kind);
  return s;
}

std::string two_digits(std::size_t i) {
  std::string s = std::to_string(i);
  return s.size() < 2 ? "0" + s : s;
}

struct Pools {
  RawDataset train;
  RawDataset test;
  bool has_test = false;
};

struct Job {
  std::size_t config = 0;
  bool walk = true;
  std::size_t index = 0;
};

void check_same(bool ok, const std::filesystem::path& file, const std::string& what) {
  if (!ok) throw IoError("read-back mismatch in " + file.string() + ": " + what);
}

void verify_trace(const std::filesystem::path& csv, const std::filesystem::path& log,
                  std::span<const ScoredGenotype> rows) {
  const auto back = read_trace_csv(csv);
  check_same(back.size() == rows.size(), csv, "row count");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    check_same(back[i].genotype_id == rows[i].genotype.id, csv, "genotype id");
    check_same(back[i].fitness == rows[i].fitness, csv, "fitness values");
  }
  const auto genotypes = read_genotype_log(log);
  check_same(genotypes.size() == rows.size(), log, "record count");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    check_same(genotypes[i] == rows[i].genotype, log, "genotype record");
  }
}

json settings_json(const ExperimentConfig& c) {
  return {{"walks", c.walks},
          {"walk_length", c.walk_length},
          {"neighbors", c.neighbors},
          {"runs", c.runs},
          {"population", c.population},
          {"generations", c.generations},
          {"tournament", c.tournament},
          {"epochs", c.training.epochs},
          {"batch", c.training.batch},
          {"limits",
           {{"min_s1", c.limits.min_s1},
            {"max_s1", c.limits.max_s1},
            {"min_s2", c.limits.min_s2},
            {"max_s2", c.limits.max_s2}}}};
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  Fields f(j, "",
           {"seed", "evaluator", "mutations", "datasets", "dataset", "walk", "evolution",
            "training", "limits", "measures"});
  ExperimentConfig c;
  f.seed("seed", c.seed);
  f.string("evaluator", c.evaluator);

  if (f.has("mutations")) {
    const json& m = f.raw("mutations");
    if (!m.is_array() || m.empty()) throw ConfigError("mutations: expected a non-empty array");
    c.mutations.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string where = "mutations[" + std::to_string(i) + "]";
      if (!m[i].is_string()) throw ConfigError(where + ": expected a string");
      auto kind = parse_mutation_kind(m[i].get<std::string>());
      if (!kind) {
        throw ConfigError(where + ": unknown mutation kind \"" + m[i].get<std::string>() + "\"");
      }
      if (std::find(c.mutations.begin(), c.mutations.end(), *kind) != c.mutations.end()) {
        throw ConfigError(where + ": duplicate mutation kind");
      }
      c.mutations.push_back(*kind);
    }
  }

  if (f.has("dataset") && f.has("datasets")) {
    throw ConfigError("dataset: give either dataset or datasets, not both");
  }
  if (f.has("dataset")) {
    c.datasets.push_back(parse_dataset(f.raw("dataset"), "dataset", base_dir));
  } else if (f.has("datasets")) {
    const json& ds = f.raw("datasets");
    if (!ds.is_array() || ds.empty()) throw ConfigError("datasets: expected a non-empty array");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      c.datasets.push_back(parse_dataset(ds[i], "datasets[" + std::to_string(i) + "]", base_dir));
    }
  }

  if (f.has("walk")) {
    Fields w(f.raw("walk"), "walk", {"count", "length", "neighbors"});
    w.integer("count", c.walks, 0);
    w.integer("length", c.walk_length, 1);
    w.integer("neighbors", c.neighbors, 1);
  }
  if (f.has("evolution")) {
    Fields e(f.raw("evolution"), "evolution", {"runs", "population", "generations", "tournament"});
    e.integer("runs", c.runs, 0);
    e.integer("population", c.population, 0);
    e.integer("generations", c.generations, 0);
    e.integer("tournament", c.tournament, 1);
    if (c.population < 2) {
      throw ConfigError("evolution.population: must be at least 2 for tournament selection");
    }
  }
  if (f.has("training")) {
    Fields t(f.raw("training"), "training", {"epochs", "batch"});
    t.integer("epochs", c.training.epochs, 1);
    t.integer("batch", c.training.batch, 1);
  }
  if (f.has("limits")) {
    Fields l(f.raw("limits"), "limits", {"min_s1", "max_s1", "min_s2", "max_s2"});
    l.integer("min_s1", c.limits.min_s1, 1);
    l.integer("max_s1", c.limits.max_s1, 1);
    l.integer("min_s2", c.limits.min_s2, 0);
    l.integer("max_s2", c.limits.max_s2, 0);
  }
  if (f.has("measures")) {
    Fields m(f.raw("measures"), "measures", {"steps", "threshold", "emr_on_test"});
    if (m.has("steps")) {
      const json& s = m.raw("steps");
      if (!s.is_array() || s.empty()) throw ConfigError("measures.steps: expected a non-empty array");
      c.measures.steps.clear();
      for (const auto& k : s) {
        if (!k.is_number_unsigned() || k.get<std::size_t>() < 1) {
          throw ConfigError("measures.steps: expected positive integers");
        }
        c.measures.steps.push_back(k.get<std::size_t>());
      }
    }
    m.real("threshold", c.measures.threshold);
    m.boolean("emr_on_test", c.measures.emr_on_test);
  }

  if (c.datasets.empty() && c.evaluator != "cnn") {
    DatasetConfig d;
    d.source = DataSource::None;
    d.name = "surrogate";
    d.class_count = 10;
    c.datasets.push_back(d);
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ConfigError("config file not found: " + path.string());
  }
  try {
    return parse_experiment_config(read_text_file(path), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void validate_config(const ExperimentConfig& c) {
  make_evaluator(c.evaluator, c.training);  // throws ConfigError on an unknown name
  if (c.datasets.empty()) throw ConfigError("datasets: at least one dataset is required");
  try {
    c.limits.require_valid();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("limits: ") + e.what());
  }
  if (c.population < 2) {
    throw ConfigError("evolution.population: must be at least 2 for tournament selection");
  }
  if (c.walk_length < 1) throw ConfigError("walk.length: must be at least 1");
  if (c.neighbors < 1) throw ConfigError("walk.neighbors: must be at least 1");
  if (!(c.measures.threshold > -1.0 && c.measures.threshold < 1.0)) {
    throw ConfigError("measures.threshold: must lie in (-1, 1)");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < c.datasets.size(); ++i) {
    const auto& d = c.datasets[i];
    const std::string where = "datasets[" + std::to_string(i) + "]";
    if (!names.insert(d.name).second) throw ConfigError(where + ".name: duplicate dataset name");
    if (d.source == DataSource::None && c.evaluator == "cnn") {
      throw ConfigError(where + ".source: the cnn evaluator needs image data");
    }
    if (d.source == DataSource::Idx) {
      for (const auto* p : {&d.images, &d.labels, &d.test_images, &d.test_labels}) {
        std::error_code ec;
        if (!p->empty() && !std::filesystem::is_regular_file(*p, ec)) {
          throw ConfigError(where + ": dataset file not found: " + p->string());
        }
      }
    }
  }
}

DatasetSplit build_split(const DatasetConfig& d, const RawDataset* pool,
                         const RawDataset* test_pool, std::uint64_t seed) {
  Rng rng(seed);
  switch (d.source) {
    case DataSource::None: {
      DatasetSplit s;
      s.name = d.name;
      s.class_count = d.class_count > 0 ? d.class_count : d.classes;
      return s;
    }
    case DataSource::Synthetic:
      return synthetic(d.class_count > 0 ? d.class_count : d.classes, d.per_class, d.height,
                       d.width, d.channels, rng, d.name);
    case DataSource::Idx:
      if (!pool) throw ConfigError("dataset " + d.name + ": pool not loaded");
      if (test_pool) return make_split(*pool, *test_pool, d.train_n, d.test_n, rng, d.name, d.class_count);
      return make_split(*pool, d.train_n, d.test_n, rng, d.name, d.class_count);
  }
  throw ConfigError("dataset " + d.name + ": unknown source");
}

namespace {

// Parsed JSON of an earlier output file, or null when absent or unreadable.
json previous_json(const std::filesystem::path& p) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(p, ec)) return nullptr;
  try {
    return json::parse(read_text_file(p));
  } catch (const std::exception&) {
    return nullptr;
  }
}

}  // namespace

std::filesystem::path configuration_dir(const std::filesystem::path& out, std::string_view dataset,
                                        MutationKind kind) {
  return out / std::string(dataset) / std::string(to_string(kind));
}

std::vector<ConfigurationResult> run_experiment(const ExperimentConfig& config,
                                                const RunOptions& options) {
  validate_config(config);
  const auto evaluator = make_evaluator(config.evaluator, config.training);
  const Grammar& grammar = Grammar::standard();

  std::vector<Pools> pools(config.datasets.size());
  for (std::size_t i = 0; i < config.datasets.size(); ++i) {
    const auto& d = config.datasets[i];
    if (d.source != DataSource::Idx) continue;
    pools[i].train = load_idx(d.images, d.labels);
    if (!d.test_images.empty()) {
      pools[i].test = load_idx(d.test_images, d.test_labels);
      pools[i].has_test = true;
    }
  }

  std::vector<ConfigurationResult> results;
  std::vector<std::size_t> dataset_of;
  for (std::size_t di = 0; di < config.datasets.size(); ++di) {
    for (MutationKind kind : config.mutations) {
      ConfigurationResult r;
      r.dataset = config.datasets[di].name;
      r.kind = kind;
      r.dir = configuration_dir(options.out, r.dataset, kind);
      r.walks.resize(options.walks ? config.walks : 0);
      r.runs.resize(options.evolution ? config.runs : 0);
      results.push_back(std::move(r));
      dataset_of.push_back(di);
    }
  }

  std::vector<Job> jobs;
  for (std::size_t ci = 0; ci < results.size(); ++ci) {
    for (std::size_t i = 0; i < results[ci].walks.size(); ++i) jobs.push_back({ci, true, i});
    for (std::size_t i = 0; i < results[ci].runs.size(); ++i) jobs.push_back({ci, false, i});
  }
  std::vector<double> seconds(jobs.size(), 0.0);
  std::vector<std::uint64_t> split_seeds(jobs.size(), 0);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  std::size_t done = 0;

  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t ji = next.fetch_add(1);
      if (ji >= jobs.size()) return;
      const Job& job = jobs[ji];
      ConfigurationResult& r = results[job.config];
      const std::size_t di = dataset_of[job.config];
      const DatasetConfig& d = config.datasets[di];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const std::string what = job.walk ? "walk" : "run";
        const std::uint64_t seed =
            derive_seed(config.seed, stable_hash(seed_stream(what, r.dataset, r.kind)), job.index);
        const std::uint64_t split_seed = derive_seed(
            config.seed, stable_hash(seed_stream("split/" + what, r.dataset, r.kind)), job.index);
        split_seeds[ji] = split_seed;
        const DatasetSplit data =
            build_split(d, d.source == DataSource::Idx ? &pools[di].train : nullptr,
                        pools[di].has_test ? &pools[di].test : nullptr, split_seed);
        Rng rng(seed);
        const std::string stem = what + "_" + two_digits(job.index);
        if (job.walk) {
          WalkSettings ws{r.kind, config.walk_length, config.neighbors, config.limits};
          const Genotype start = random_genotype(grammar, data.class_count, rng, config.limits);
          WalkTrace trace = selective_walk(start, ws, *evaluator, data, rng, grammar);
          trace.seed = seed;
          const auto dir = r.dir / "walks";
          write_text_file(dir / (stem + ".csv"), walk_csv(trace));
          write_text_file(dir / (stem + ".candidates.csv"), candidates_csv(trace));
          write_text_file(dir / (stem + ".genotypes.txt"), genotype_log(trace.steps));
          verify_trace(dir / (stem + ".csv"), dir / (stem + ".genotypes.txt"), trace.steps);
          const auto cand = read_candidates_csv(dir / (stem + ".candidates.csv"));
          check_same(cand.size() == trace.neighbor_evaluations(), dir / (stem + ".candidates.csv"),
                     "row count");
          r.walks[job.index] = std::move(trace);
        } else {
          EvolutionSettings es{r.kind, config.population, config.generations, config.tournament,
                               config.limits};
          EvolutionTrace trace = evolve(es, *evaluator, data, rng, grammar);
          trace.seed = seed;
          const auto dir = r.dir / "evolution";
          write_text_file(dir / (stem + ".csv"), evolution_csv(trace));
          write_text_file(dir / (stem + ".genotypes.txt"), genotype_log(trace.best));
          verify_trace(dir / (stem + ".csv"), dir / (stem + ".genotypes.txt"), trace.best);
          r.runs[job.index] = std::move(trace);
        }
        seconds[ji] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard lock(mu);
        ++done;
        if (options.log) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.1f", seconds[ji]);
          options.log("[" + std::to_string(done) + "/" + std::to_string(jobs.size()) + "] " +
                      r.dataset + "/" + std::string(to_string(r.kind)) + "/" + stem + " " + buf +
                      " s");
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.jobs, jobs.size()));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  // Manifests and timings.
  json timings = json::array();
  for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
    const Job& job = jobs[ji];
    auto& r = results[job.config];
    const std::string stem = std::string(job.walk ? "walk_" : "run_") + two_digits(job.index);
    const std::string rel = r.dataset + "/" + std::string(to_string(r.kind)) + "/" +
                            (job.walk ? "walks/" : "evolution/") + stem + ".csv";
    r.timings.push_back({rel, seconds[ji]});
    timings.push_back({{"file", rel}, {"seconds", seconds[ji]}});
  }
  std::size_t ji = 0;
  for (auto& r : results) {
    json walks = json::array();
    for (const auto& w : r.walks) {
      walks.push_back({{"file", "walks/walk_" + two_digits(walks.size()) + ".csv"},
                       {"seed", w.seed},
                       {"split_seed", split_seeds[ji++]},
                       {"steps", w.steps.size()},
                       {"evaluations", w.evaluations},
                       {"neighbor_evaluations", w.neighbor_evaluations()}});
    }
    json runs = json::array();
    for (const auto& e : r.runs) {
      runs.push_back({{"file", "evolution/run_" + two_digits(runs.size()) + ".csv"},
                      {"seed", e.seed},
                      {"split_seed", split_seeds[ji++]},
                      {"generations", e.best.size()},
                      {"evaluations", e.evaluations}});
    }
    json manifest = {{"dataset", r.dataset},
                     {"mutation", to_string(r.kind)},
                     {"evaluator", config.evaluator},
                     {"seed", config.seed},
                     {"settings", settings_json(config)},
                     {"walks", walks},
                     {"runs", runs}};
    // A walk-only or evolution-only pass keeps the other half of an earlier
    // manifest written under the same settings.
    if (const json old = previous_json(r.dir / "manifest.json");
        old.is_object() && old.value("evaluator", "") == manifest["evaluator"] &&
        old.value("seed", json()) == manifest["seed"] && old.value("settings", json()) == manifest["settings"]) {
      if (!options.walks && old.contains("walks")) manifest["walks"] = old["walks"];
      if (!options.evolution && old.contains("runs")) manifest["runs"] = old["runs"];
    }
    write_text_file(r.dir / "manifest.json", manifest.dump(2) + "\n");
  }
  if (!jobs.empty()) {
    // Entries for files not rerun this time are kept.
    const json old = previous_json(options.out / "timings.json");
    if (old.is_array()) {
      json merged = json::array();
      std::set<std::string> fresh;
      for (const auto& t : timings) fresh.insert(t["file"].get<std::string>());
      for (const auto& t : old) {
        if (t.is_object() && t.contains("file") && !fresh.count(t["file"].get<std::string>())) merged.push_back(t);
      }
      for (const auto& t : timings) merged.push_back(t);
      timings = std::move(merged);
    }
    write_text_file(options.out / "timings.json", timings.dump(2) + "\n");
  }
  return results;
}

}  // namespace landlab
