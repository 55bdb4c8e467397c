#include "landlab/reports.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "landlab/errors.hpp"
#include "landlab/trace_io.hpp"

namespace landlab {

namespace {

using nlohmann::json;

bool is_walk_trace(const std::filesystem::path& p) {
  const std::string name = p.filename().string();
  return name.rfind("walk_", 0) == 0 && p.extension() == ".csv" &&
         name.find(".candidates.") == std::string::npos;
}

bool has_walk_traces(const std::filesystem::path& dir) {
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && is_walk_trace(e.path())) return true;
  }
  return false;
}

std::string group_prefix(const ConfigurationMeasures& m, const AutocorrelationGroup& g) {
  return m.label() + "," + std::string(to_string(g.split)) + "," + std::to_string(g.k);
}

void entropy_rows(std::string& s, const ConfigurationMeasures& m, const EntropyReport& r,
                  Split split) {
  const auto fractions = epsilon_fractions();
  const std::string prefix = m.label() + "," + std::string(to_string(split)) + ",";
  for (std::size_t i = 0; i < kEpsilonSchedulePoints; ++i) {
    for (std::size_t w = 0; w < r.walk_ids.size(); ++w) {
      s += prefix + format_real(fractions[i]) + "," + r.walk_ids[w] + "," +
           format_real(r.schedule[w][i]) + "," + format_real(r.h_curve[w][i]) + "\n";
    }
    s += prefix + format_real(fractions[i]) + ",mean,," + format_real(r.h_bar[i]) + "\n";
  }
}

json entropy_json(const EntropyReport& r) {
  json walks = json::array();
  for (std::size_t w = 0; w < r.walk_ids.size(); ++w) {
    walks.push_back({{"walk_id", r.walk_ids[w]},
                     {"epsilon_star", r.epsilon_star[w]},
                     {"h", r.h_curve[w]}});
  }
  return {{"epsilon_fractions", epsilon_fractions()},
          {"h_bar", r.h_bar},
          {"r_f", r.r_f},
          {"walks", walks}};
}

json measures_json(const ConfigurationMeasures& m) {
  json groups = json::array();
  for (const auto& g : m.autocorrelation.groups) {
    json box = nullptr;
    if (g.box.count > 0) {
      box = {{"count", g.box.count}, {"min", g.box.min},       {"q1", g.box.q1},
             {"median", g.box.median}, {"q3", g.box.q3},       {"max", g.box.max}};
    }
    groups.push_back({{"split", to_string(g.split)},
                      {"k", g.k},
                      {"box", box},
                      {"undefined", g.undefined},
                      {"classification",
                       g.rho.empty() ? std::string_view("undefined") : to_string(g.classification)}});
  }
  json j = {{"config", m.label()},
            {"dataset", m.dataset},
            {"mutation", m.mutation},
            {"walks", m.walk_count},
            {"threshold", m.autocorrelation.threshold},
            {"autocorrelation", groups},
            {"entropy", {{"train", entropy_json(m.entropy_train)}}}};
  if (m.entropy_test) j["entropy"]["test"] = entropy_json(*m.entropy_test);
  return j;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) return cells;
    start = comma + 1;
  }
}

void expect_rows(const std::filesystem::path& file, std::size_t expected) {
  const CsvTable t = read_csv_table(file);
  if (t.rows.size() != expected) {
    throw IoError("read-back mismatch in " + file.string() + ": expected " +
                  std::to_string(expected) + " rows, found " + std::to_string(t.rows.size()));
  }
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw MeasureError("no column named " + std::string(name));
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  CsvTable t;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t e = text.find('\n', pos);
    if (e == std::string::npos) e = text.size();
    std::string_view line = std::string_view(text).substr(pos, e - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = e + 1;
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ParseError(path.string(), line_no, 1,
                       "expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ParseError(path.string(), 1, 1, "empty file, expected header");
  return t;
}

std::vector<FitnessSeries> read_walk_series(const std::filesystem::path& walks_dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(walks_dir, ec)) {
    if (e.is_regular_file() && is_walk_trace(e.path())) files.push_back(e.path());
  }
  if (ec) throw IoError("cannot list " + walks_dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<FitnessSeries> out;
  for (const auto& f : files) {
    const auto rows = read_trace_csv(f);
    FitnessSeries train{{}, f.stem().string(), Split::Train};
    FitnessSeries test{{}, f.stem().string(), Split::Test};
    for (const auto& r : rows) {
      train.values.push_back(r.fitness.train_loss);
      test.values.push_back(r.fitness.test_loss);
    }
    out.push_back(std::move(train));
    out.push_back(std::move(test));
  }
  return out;
}

ConfigurationMeasures measure_walks(std::span<const FitnessSeries> series,
                                    const MeasureSettings& settings) {
  ConfigurationMeasures m;
  m.autocorrelation = autocorrelation_report(series, settings.steps, settings.threshold);
  std::vector<FitnessSeries> train, test;
  for (const auto& s : series) (s.split == Split::Train ? train : test).push_back(s);
  m.walk_count = train.size();
  if (train.empty()) throw MeasureError("no training series to measure");
  m.entropy_train = emr_report(train);
  if (settings.emr_on_test && !test.empty()) m.entropy_test = emr_report(test);
  return m;
}

std::vector<ConfigurationMeasures> measure_tree(const std::filesystem::path& root,
                                                const MeasureSettings& settings) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    throw ConfigError("trace directory not found: " + root.string());
  }
  std::vector<std::filesystem::path> dirs;
  if (has_walk_traces(root)) dirs.push_back(root);
  for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
       it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (it->is_directory() && it->path().filename() == "walks" && has_walk_traces(it->path())) {
      dirs.push_back(it->path());
    }
  }
  if (dirs.empty()) throw ConfigError("no walk traces found under " + root.string());
  std::sort(dirs.begin(), dirs.end());

  std::vector<ConfigurationMeasures> out;
  for (const auto& walks_dir : dirs) {
    const auto series = read_walk_series(walks_dir);
    ConfigurationMeasures m = measure_walks(series, settings);
    std::filesystem::path config_dir =
        walks_dir.filename() == "walks" ? walks_dir.parent_path() : walks_dir;
    m.dir = config_dir;
    m.mutation = config_dir.filename().string();
    m.dataset = config_dir.has_parent_path() ? config_dir.parent_path().filename().string() : "";
    const auto manifest = config_dir / "manifest.json";
    if (std::filesystem::is_regular_file(manifest, ec)) {
      try {
        const json j = json::parse(read_text_file(manifest));
        m.dataset = j.value("dataset", m.dataset);
        m.mutation = j.value("mutation", m.mutation);
      } catch (const json::exception& e) {
        throw ParseError(manifest.string(), 0, 0, e.what());
      }
    }
    if (m.dataset.empty()) m.dataset = "dataset";
    out.push_back(std::move(m));
  }
  return out;
}

std::string autocorrelation_csv(const ConfigurationMeasures& m) {
  std::string s = "config,split,k,walk_id,value\n";
  for (const auto& g : m.autocorrelation.groups) {
    for (std::size_t i = 0; i < g.rho.size(); ++i) {
      s += group_prefix(m, g) + "," + g.walk_ids[i] + "," + format_real(g.rho[i]) + "\n";
    }
  }
  return s;
}

std::string boxplots_csv(const ConfigurationMeasures& m) {
  std::string s = "config,split,k,count,min,q1,median,q3,max,undefined,classification\n";
  for (const auto& g : m.autocorrelation.groups) {
    s += group_prefix(m, g) + "," + std::to_string(g.box.count) + ",";
    if (g.box.count > 0) {
      s += format_real(g.box.min) + "," + format_real(g.box.q1) + "," +
           format_real(g.box.median) + "," + format_real(g.box.q3) + "," +
           format_real(g.box.max) + ",";
    } else {
      s += ",,,,,";
    }
    s += std::to_string(g.undefined) + ",";
    s += g.rho.empty() ? "undefined" : std::string(to_string(g.classification));
    s += "\n";
  }
  return s;
}

std::string entropy_csv(const ConfigurationMeasures& m) {
  std::string s = "config,split,epsilon_fraction,walk_id,epsilon,value\n";
  entropy_rows(s, m, m.entropy_train, Split::Train);
  if (m.entropy_test) entropy_rows(s, m, *m.entropy_test, Split::Test);
  return s;
}

std::string summary_json(const ConfigurationMeasures& m) { return measures_json(m).dump(2) + "\n"; }

std::string rf_table_csv(std::span<const ConfigurationMeasures> all) {
  static constexpr std::string_view kColumns[] = {"learning", "parameters", "topology"};
  std::vector<std::string> datasets;
  std::map<std::pair<std::string, std::string>, double> rf;
  for (const auto& m : all) {
    if (std::find(datasets.begin(), datasets.end(), m.dataset) == datasets.end()) {
      datasets.push_back(m.dataset);
    }
    rf[{m.dataset, m.mutation}] = m.entropy_train.r_f;
  }
  std::string s = "dataset,learning,parameters,topology\n";
  for (const auto& d : datasets) {
    s += d;
    for (auto c : kColumns) {
      s += ",";
      auto it = rf.find({d, std::string(c)});
      if (it != rf.end()) s += format_real(it->second);
    }
    s += "\n";
  }
  return s;
}

std::vector<std::filesystem::path> write_reports(std::span<const ConfigurationMeasures> all,
                                                 const std::filesystem::path& root) {
  std::vector<std::filesystem::path> written;
  auto emit_csv = [&](const std::filesystem::path& p, const std::string& content) {
    write_text_file(p, content);
    expect_rows(p, count_lines(content) - 1);
    written.push_back(p);
  };
  json overall = json::array();
  for (const auto& m : all) {
    const auto dir = m.dir / "measures";
    emit_csv(dir / "autocorrelation.csv", autocorrelation_csv(m));
    emit_csv(dir / "boxplots.csv", boxplots_csv(m));
    emit_csv(dir / "entropy.csv", entropy_csv(m));
    write_text_file(dir / "summary.json", summary_json(m));
    written.push_back(dir / "summary.json");
    overall.push_back(measures_json(m));
  }
  emit_csv(root / "rf_table.csv", rf_table_csv(all));
  write_text_file(root / "summary.json", overall.dump(2) + "\n");
  written.push_back(root / "summary.json");
  return written;
}

}  // namespace landlab
