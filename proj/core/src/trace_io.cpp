#include "landlab/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "landlab/errors.hpp"

namespace landlab {

std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string format_id(std::uint64_t id) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void append_fitness(std::string& s, const FitnessPair& f) {
  s += format_real(f.train_loss);
  s += ',';
  s += format_real(f.test_loss);
  s += ',';
  s += format_real(f.train_accuracy);
  s += ',';
  s += format_real(f.test_accuracy);
}

std::string trace_rows(std::string_view header, std::span<const ScoredGenotype> rows) {
  std::string s(header);
  s += '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s += std::to_string(i) + ',' + format_id(rows[i].genotype.id) + ',';
    append_fitness(s, rows[i].fitness);
    s += '\n';
  }
  return s;
}

class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path)
      : file_(path.string()), text_(read_text_file(path)) {}

  void expect_header(std::string_view header) { expect_header(header, header); }

  // Accepts either of two headers.
  void expect_header(std::string_view a, std::string_view b) {
    std::string_view line;
    if (!next(line)) fail(1, 1, "empty file, expected header");
    if (line != a && line != b) {
      fail(line_, 1, "unexpected header, expected '" + std::string(a) + "'");
    }
  }

  /// Splits the next non-empty line; false at end of input.
  bool row(std::vector<std::string_view>& cells) {
    std::string_view line;
    do {
      if (!next(line)) return false;
    } while (line.empty());
    cells.clear();
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    cell_starts_.clear();
    std::size_t col = 1;
    for (auto c : cells) {
      cell_starts_.push_back(col);
      col += c.size() + 1;
    }
    return true;
  }

  void require_cells(const std::vector<std::string_view>& cells, std::size_t n) const {
    if (cells.size() != n) {
      fail(line_, 1,
           "expected " + std::to_string(n) + " fields, found " + std::to_string(cells.size()));
    }
  }

  std::size_t to_size(std::string_view s, std::size_t cell) const {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail(line_, cell_starts_[cell], "expected integer");
    return v;
  }

  std::uint64_t to_id(std::string_view s, std::size_t cell) const {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
      fail(line_, cell_starts_[cell], "expected hexadecimal genotype id");
    }
    return v;
  }

  double to_real(std::string_view s, std::size_t cell) const {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
      fail(line_, cell_starts_[cell], "expected real number");
    }
    return v;
  }

  FitnessPair to_fitness(const std::vector<std::string_view>& c, std::size_t first) const {
    return {to_real(c[first], first), to_real(c[first + 1], first + 1),
            to_real(c[first + 2], first + 2), to_real(c[first + 3], first + 3)};
  }

  [[noreturn]] void fail(std::size_t line, std::size_t col, const std::string& what) const {
    throw ParseError(file_, line, col, what);
  }

  std::size_t line() const { return line_; }

 private:
  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t e = text_.find('\n', pos_);
    if (e == std::string::npos) e = text_.size();
    line = std::string_view(text_).substr(pos_, e - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = e + 1;
    ++line_;
    return true;
  }

  std::string file_;
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::vector<std::size_t> cell_starts_;
};

}  // namespace

std::string walk_csv(const WalkTrace& trace) { return trace_rows(kWalkHeader, trace.steps); }

std::string evolution_csv(const EvolutionTrace& trace) {
  return trace_rows(kEvolutionHeader, trace.best);
}

std::string candidates_csv(const WalkTrace& trace) {
  std::string s(kCandidateHeader);
  s += '\n';
  for (std::size_t t = 0; t < trace.candidates.size(); ++t) {
    for (std::size_t j = 0; j < trace.candidates[t].size(); ++j) {
      const auto& c = trace.candidates[t][j];
      s += std::to_string(t + 1) + ',' + std::to_string(j) + ',' + format_id(c.genotype.id) + ',';
      append_fitness(s, c.fitness);
      s += trace.chosen[t] == j ? ",1\n" : ",0\n";
    }
  }
  return s;
}

std::string genotype_log(std::span<const ScoredGenotype> items) {
  std::string s;
  for (const auto& item : items) s += serialize(item.genotype);
  return s;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  CsvReader r(path);
  r.expect_header(kWalkHeader, kEvolutionHeader);
  std::vector<TraceRow> rows;
  std::vector<std::string_view> c;
  while (r.row(c)) {
    r.require_cells(c, 6);
    TraceRow row{r.to_size(c[0], 0), r.to_id(c[1], 1), r.to_fitness(c, 2)};
    if (row.index != rows.size()) r.fail(r.line(), 1, "out-of-order index");
    rows.push_back(row);
  }
  return rows;
}

std::vector<CandidateRow> read_candidates_csv(const std::filesystem::path& path) {
  CsvReader r(path);
  r.expect_header(kCandidateHeader);
  std::vector<CandidateRow> rows;
  std::vector<std::string_view> c;
  while (r.row(c)) {
    r.require_cells(c, 8);
    CandidateRow row;
    row.step = r.to_size(c[0], 0);
    row.candidate = r.to_size(c[1], 1);
    row.genotype_id = r.to_id(c[2], 2);
    row.fitness = r.to_fitness(c, 3);
    const std::size_t sel = r.to_size(c[7], 7);
    if (sel > 1) r.fail(r.line(), 1, "selected flag must be 0 or 1");
    row.selected = sel == 1;
    rows.push_back(row);
  }
  return rows;
}

std::vector<Genotype> read_genotype_log(const std::filesystem::path& path) {
  return deserialize_all(read_text_file(path), path.string());
}

}  // namespace landlab
