// Text form of genotypes:
//
//   genotype id=1f2e3d4c5b6a7988
//   conv filters=32 kernel_size=3 stride=1 activation=relu use_bias=true
//   pool type=max pool_size=2 stride=2
//   flatten
//   dropout rate=0.4123
//   output units=10 activation=softmax use_bias=false
//   optimizer learning_rate=0.01 decay=0.0001 momentum=0.9 nesterov=false
//   end
//
// Reals use the shortest representation that round-trips exactly.

#include <charconv>
#include <cstdio>
#include <map>

#include "landlab/errors.hpp"
#include "landlab/grammar.hpp"

namespace landlab {

namespace {

std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string_view bool_text(bool b) { return b ? "true" : "false"; }

std::string gene_line(const Gene& gene) {
  std::string s(to_string(kind_of(gene)));
  auto field = [&s](std::string_view key, std::string_view value) {
    s += ' ';
    s += key;
    s += '=';
    s += value;
  };
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ConvGene>) {
          field("filters", std::to_string(g.filters));
          field("kernel_size", std::to_string(g.kernel_size));
          field("stride", std::to_string(g.stride));
          field("activation", to_string(g.activation));
          field("use_bias", bool_text(g.use_bias));
        } else if constexpr (std::is_same_v<T, PoolGene>) {
          field("type", to_string(g.type));
          field("pool_size", std::to_string(g.pool_size));
          field("stride", std::to_string(g.stride));
        } else if constexpr (std::is_same_v<T, DenseGene>) {
          field("units", std::to_string(g.units));
          field("activation", to_string(g.activation));
          field("use_bias", bool_text(g.use_bias));
        } else if constexpr (std::is_same_v<T, DropoutGene>) {
          field("rate", format_real(g.rate));
        } else if constexpr (std::is_same_v<T, OutputGene>) {
          field("units", std::to_string(g.units()));
          field("activation", to_string(g.activation()));
          field("use_bias", bool_text(g.use_bias));
        } else if constexpr (std::is_same_v<T, OptimizerGene>) {
          field("learning_rate", format_real(g.learning_rate));
          field("decay", format_real(g.decay));
          field("momentum", format_real(g.momentum));
          field("nesterov", bool_text(g.nesterov));
        }
      },
      gene);
  return s;
}

void append_body(std::string& out, const Genotype& g) {
  for (const auto& gene : g.s1) out += gene_line(gene) + '\n';
  out += gene_line(g.flatten) + '\n';
  for (const auto& gene : g.s2) out += gene_line(gene) + '\n';
  out += gene_line(g.output) + '\n';
  out += gene_line(g.optimizer) + '\n';
  out += "end\n";
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> split_tokens(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

class RecordParser {
 public:
  RecordParser(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  bool at_end() {
    skip_blank();
    return pos_ >= text_.size();
  }

  std::size_t upcoming_line() const { return line_no_ + 1; }

  Genotype parse_record() {
    skip_blank();
    if (pos_ >= text_.size()) fail(line_no_ + 1, 1, "expected 'genotype' record, found end of input");

    auto [header, hline] = next_line();
    auto tokens = split_tokens(header);
    if (tokens.empty() || tokens[0].text != "genotype") {
      fail(hline, tokens.empty() ? 1 : tokens[0].column, "expected 'genotype' record header");
    }
    Fields fields = parse_fields(tokens, hline);
    Genotype g;
    g.id = parse_hex(take(fields, "id", hline, header.size() + 1), hline);
    reject_extra(fields, hline);

    bool seen_flatten = false;
    bool seen_output = false;
    bool seen_optimizer = false;
    for (;;) {
      skip_blank();
      if (pos_ >= text_.size()) {
        const char* missing = !seen_flatten    ? "missing flatten gene"
                              : !seen_output   ? "missing output gene"
                              : !seen_optimizer ? "missing optimizer gene"
                                                : "missing 'end' line";
        fail(line_no_ + 1, 1, std::string("truncated record: ") + missing);
      }
      auto [line, lno] = next_line();
      auto toks = split_tokens(line);
      const std::string_view kind = toks[0].text;
      const std::size_t eol = line.size() + 1;
      if (kind == "end") {
        if (!seen_flatten) fail(lno, 1, "truncated record: missing flatten gene");
        if (!seen_output) fail(lno, 1, "truncated record: missing output gene");
        if (!seen_optimizer) fail(lno, 1, "truncated record: missing optimizer gene");
        if (toks.size() > 1) fail(lno, toks[1].column, "unexpected text after 'end'");
        return g;
      }
      if (seen_optimizer) fail(lno, toks[0].column, "expected 'end' after optimizer gene");
      Fields f = parse_fields(toks, lno);
      if (kind == "conv" || kind == "pool" || kind == "dense" || kind == "dropout") {
        if (seen_output) fail(lno, toks[0].column, "layer gene after output gene");
        Gene gene = parse_layer(kind, f, lno, eol);
        (seen_flatten ? g.s2 : g.s1).push_back(gene);
      } else if (kind == "flatten") {
        if (seen_flatten) fail(lno, toks[0].column, "duplicate flatten gene");
        seen_flatten = true;
      } else if (kind == "output") {
        if (!seen_flatten) fail(lno, toks[0].column, "output gene before flatten gene");
        if (seen_output) fail(lno, toks[0].column, "duplicate output gene");
        const int units = parse_int(take(f, "units", lno, eol), lno);
        const Value av = take(f, "activation", lno, eol);
        const auto act = parse_activation(av.text);
        if (!act) fail(lno, av.column, "unknown activation");
        const bool bias = parse_bool(take(f, "use_bias", lno, eol), lno);
        g.output = OutputGene(units, bias, *act);
        seen_output = true;
      } else if (kind == "optimizer") {
        if (!seen_output) fail(lno, toks[0].column, "optimizer gene before output gene");
        g.optimizer.learning_rate = parse_real(take(f, "learning_rate", lno, eol), lno);
        g.optimizer.decay = parse_real(take(f, "decay", lno, eol), lno);
        g.optimizer.momentum = parse_real(take(f, "momentum", lno, eol), lno);
        g.optimizer.nesterov = parse_bool(take(f, "nesterov", lno, eol), lno);
        seen_optimizer = true;
      } else {
        fail(lno, toks[0].column, "unknown gene kind '" + std::string(kind) + "'");
      }
      reject_extra(f, lno);
    }
  }

 private:
  struct Value {
    std::string_view text;
    std::size_t column;
  };
  using Fields = std::map<std::string_view, Value>;

  [[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& what) const {
    throw ParseError(source_, line, column, what);
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      std::size_t e = text_.find('\n', pos_);
      if (e == std::string_view::npos) e = text_.size();
      if (!split_tokens(text_.substr(pos_, e - pos_)).empty()) return;
      pos_ = e + 1;
      ++line_no_;
    }
  }

  std::pair<std::string_view, std::size_t> next_line() {
    std::size_t e = text_.find('\n', pos_);
    if (e == std::string_view::npos) e = text_.size();
    auto line = text_.substr(pos_, e - pos_);
    pos_ = e + 1;
    return {line, ++line_no_};
  }

  Fields parse_fields(const std::vector<Token>& toks, std::size_t line) const {
    Fields f;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      auto eq = toks[i].text.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        fail(line, toks[i].column, "expected key=value");
      }
      auto key = toks[i].text.substr(0, eq);
      if (!f.emplace(key, Value{toks[i].text.substr(eq + 1), toks[i].column + eq + 1}).second) {
        fail(line, toks[i].column, "duplicate field '" + std::string(key) + "'");
      }
    }
    return f;
  }

  Value take(Fields& f, std::string_view key, std::size_t line, std::size_t eol) const {
    auto it = f.find(key);
    if (it == f.end()) fail(line, eol, "missing field '" + std::string(key) + "'");
    Value v = it->second;
    f.erase(it);
    return v;
  }

  void reject_extra(const Fields& f, std::size_t line) const {
    if (!f.empty()) {
      const auto& [key, v] = *f.begin();
      fail(line, v.column - key.size() - 1, "unknown field '" + std::string(key) + "'");
    }
  }

  int parse_int(Value v, std::size_t line) const {
    int out = 0;
    auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (ec != std::errc{} || p != v.text.data() + v.text.size()) {
      fail(line, v.column, "expected integer");
    }
    return out;
  }

  double parse_real(Value v, std::size_t line) const {
    double out = 0;
    auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (ec != std::errc{} || p != v.text.data() + v.text.size()) {
      fail(line, v.column, "expected real number");
    }
    return out;
  }

  std::uint64_t parse_hex(Value v, std::size_t line) const {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out, 16);
    if (ec != std::errc{} || p != v.text.data() + v.text.size()) {
      fail(line, v.column, "expected hexadecimal id");
    }
    return out;
  }

  bool parse_bool(Value v, std::size_t line) const {
    if (v.text == "true") return true;
    if (v.text == "false") return false;
    fail(line, v.column, "expected true or false");
  }

  Gene parse_layer(std::string_view kind, Fields& f, std::size_t line, std::size_t eol) const {
    auto activation = [&](Fields& fs) {
      Value v = take(fs, "activation", line, eol);
      auto a = parse_activation(v.text);
      if (!a) fail(line, v.column, "unknown activation");
      return *a;
    };
    if (kind == "conv") {
      ConvGene c;
      c.filters = parse_int(take(f, "filters", line, eol), line);
      c.kernel_size = parse_int(take(f, "kernel_size", line, eol), line);
      c.stride = parse_int(take(f, "stride", line, eol), line);
      c.activation = activation(f);
      c.use_bias = parse_bool(take(f, "use_bias", line, eol), line);
      return c;
    }
    if (kind == "pool") {
      PoolGene c;
      Value t = take(f, "type", line, eol);
      auto type = parse_pool_type(t.text);
      if (!type) fail(line, t.column, "unknown pool type");
      c.type = *type;
      c.pool_size = parse_int(take(f, "pool_size", line, eol), line);
      c.stride = parse_int(take(f, "stride", line, eol), line);
      return c;
    }
    if (kind == "dense") {
      DenseGene c;
      c.units = parse_int(take(f, "units", line, eol), line);
      c.activation = activation(f);
      c.use_bias = parse_bool(take(f, "use_bias", line, eol), line);
      return c;
    }
    return DropoutGene{parse_real(take(f, "rate", line, eol), line)};
  }

  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

std::string serialize(const Genotype& g) {
  char id[32];
  std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(g.id));
  std::string out = "genotype id=";
  out += id;
  out += '\n';
  append_body(out, g);
  return out;
}

std::string canonical_text(const Genotype& g) {
  std::string out;
  append_body(out, g);
  return out;
}

Genotype deserialize(std::string_view text, const std::string& source) {
  RecordParser p(text, source);
  Genotype g = p.parse_record();
  if (!p.at_end()) {
    throw ParseError(source, p.upcoming_line(), 1, "trailing content after genotype record");
  }
  return g;
}

std::vector<Genotype> deserialize_all(std::string_view text, const std::string& source) {
  RecordParser p(text, source);
  std::vector<Genotype> out;
  while (!p.at_end()) out.push_back(p.parse_record());
  return out;
}

}  // namespace landlab
