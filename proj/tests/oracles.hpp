#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary. Deliberately naive: no shared code with core/src.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "landlab/grammar.hpp"
#include "landlab/mutation.hpp"
#include "landlab/network.hpp"
#include "landlab/random.hpp"

namespace landlab::oracle {

// ---- measures ------------------------------------------------------------

inline double autocorrelation(const std::vector<double>& f, std::size_t k) {
  long double mean = 0;
  for (double v : f) mean += v;
  mean /= f.size();
  long double num = 0, den = 0;
  for (std::size_t t = 0; t < f.size(); ++t) den += (f[t] - mean) * (f[t] - mean);
  for (std::size_t t = 0; t + k < f.size(); ++t) num += (f[t] - mean) * (f[t + k] - mean);
  return static_cast<double>(num / den);
}

inline std::vector<int> encode(const std::vector<double>& f, double eps) {
  std::vector<int> s;
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double d = f[i] - f[i - 1];
    s.push_back(d > eps ? 1 : (d < -eps ? -1 : 0));
  }
  return s;
}

inline double entropy(const std::vector<int>& s) {
  std::map<std::pair<int, int>, int> blocks;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) ++blocks[{s[i], s[i + 1]}];
  const double n = static_cast<double>(s.size() - 1);
  double h = 0;
  for (auto [pq, count] : blocks) {
    if (pq.first == pq.second) continue;
    const double p = count / n;
    h -= p * std::log(p) / std::log(6.0);
  }
  return h;
}

inline double stability(const std::vector<double>& f) {
  double e = 0;
  for (std::size_t i = 1; i < f.size(); ++i) e = std::max(e, std::fabs(f[i] - f[i - 1]));
  return e;
}

inline std::vector<double> random_series(Rng& rng, std::size_t n) {
  std::vector<double> f(n);
  for (double& v : f) v = uniform_real(rng, -5, 5);
  return f;
}

// ---- mutation locality -----------------------------------------------------

struct Diff {
  int optimizer_fields = 0;
  int other_fields = 0;
  int genes_with_changes = 0;
};

inline int count_fields(const Gene& a, const Gene& b) {
  if (a.index() != b.index()) return 100;
  if (auto* x = std::get_if<ConvGene>(&a)) {
    auto& y = std::get<ConvGene>(b);
    return (x->filters != y.filters) + (x->kernel_size != y.kernel_size) + (x->stride != y.stride) +
           (x->activation != y.activation) + (x->use_bias != y.use_bias);
  }
  if (auto* x = std::get_if<PoolGene>(&a)) {
    auto& y = std::get<PoolGene>(b);
    return (x->type != y.type) + (x->pool_size != y.pool_size) + (x->stride != y.stride);
  }
  if (auto* x = std::get_if<DenseGene>(&a)) {
    auto& y = std::get<DenseGene>(b);
    return (x->units != y.units) + (x->activation != y.activation) + (x->use_bias != y.use_bias);
  }
  if (auto* x = std::get_if<DropoutGene>(&a)) return x->rate != std::get<DropoutGene>(b).rate;
  return 0;
}

// Field-by-field diff. Section length changes and output shape changes
// count 100 so they never pass as a single-field edit.
inline Diff diff(const Genotype& a, const Genotype& b) {
  Diff d;
  d.optimizer_fields = (a.optimizer.learning_rate != b.optimizer.learning_rate) +
                       (a.optimizer.decay != b.optimizer.decay) +
                       (a.optimizer.momentum != b.optimizer.momentum) +
                       (a.optimizer.nesterov != b.optimizer.nesterov);
  auto section = [&](const std::vector<Gene>& x, const std::vector<Gene>& y) {
    if (x.size() != y.size()) {
      d.other_fields += 100;
      return;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int n = count_fields(x[i], y[i]);
      d.other_fields += n;
      d.genes_with_changes += n > 0;
    }
  };
  section(a.s1, b.s1);
  section(a.s2, b.s2);
  const int out = (a.output.use_bias != b.output.use_bias) + 100 * (a.output.units() != b.output.units()) +
                  100 * (a.output.activation() != b.output.activation());
  d.other_fields += out;
  d.genes_with_changes += out > 0;
  return d;
}

// True when `longer` equals `shorter` with one gene inserted in s1 or s2.
inline bool one_insertion(const Genotype& shorter, const Genotype& longer) {
  auto seq = [](const Genotype& g) {
    std::vector<std::pair<int, Gene>> v;
    for (auto& x : g.s1) v.emplace_back(1, x);
    for (auto& x : g.s2) v.emplace_back(2, x);
    return v;
  };
  const auto a = seq(shorter), b = seq(longer);
  if (b.size() != a.size() + 1) return false;
  for (std::size_t skip = 0; skip < b.size(); ++skip) {
    bool same = true;
    for (std::size_t i = 0, j = 0; i < a.size(); ++i, ++j) {
      if (j == skip) ++j;
      if (a[i] != b[j]) {
        same = false;
        break;
      }
    }
    if (same) return true;
  }
  return false;
}

// Empty when `child` is a legal single `kind` step from `parent`.
inline std::string locality_violation(const Genotype& parent, const Genotype& child, MutationKind kind) {
  if (child.output.units() != parent.output.units()) return "output units changed";
  switch (kind) {
    case MutationKind::Learning: {
      const Diff d = diff(parent, child);
      if (d.optimizer_fields != 1 || d.other_fields != 0) return "not exactly one optimizer field";
      break;
    }
    case MutationKind::Parameters: {
      const Diff d = diff(parent, child);
      if (d.optimizer_fields != 0 || d.other_fields != 1 || d.genes_with_changes != 1) {
        return "not exactly one parameter";
      }
      break;
    }
    case MutationKind::Topology:
      if (!(parent.optimizer == child.optimizer) || !(parent.output == child.output)) {
        return "topology step touched optimizer or output";
      }
      if (!(child.gene_count() > parent.gene_count() ? one_insertion(parent, child)
                                                     : one_insertion(child, parent))) {
        return "not exactly one gene added or removed";
      }
      break;
  }
  return {};
}

// ---- networks ----------------------------------------------------------------

inline Genotype make_genotype(std::vector<Gene> s1, std::vector<Gene> s2, int classes,
                              bool out_bias = true) {
  Genotype g;
  g.s1 = std::move(s1);
  g.s2 = std::move(s2);
  g.output = OutputGene(classes, out_bias);
  g.optimizer = OptimizerGene{1e-2, 1e-4, 0.9, true};
  g.id = 1;
  return g;
}

inline Phenotype decode_or_throw(const Genotype& g, Shape input, int classes) {
  auto d = decode(g, input, classes);
  if (!std::holds_alternative<Phenotype>(d)) throw std::logic_error("micro-network is infeasible");
  return std::get<Phenotype>(d);
}

struct GradCheck {
  double max_relative = 0.0;
  std::size_t checked = 0;
};

// Central differences (delta 1e-4) against the analytic gradient of every
// trainable value. Dropout masks are replayed from a fixed seed.
inline GradCheck gradient_check(const Phenotype& p, bool training, std::uint64_t seed) {
  Rng init(seed);
  Network<double> net(p, init);
  Rng data_rng(seed + 1);
  const std::size_t n = 3;
  std::vector<double> images(n * p.input.size());
  for (double& v : images) v = uniform_real(data_rng, 0.0, 1.0);
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(i % p.class_count));

  auto loss = [&] {
    Rng mask(seed + 2);
    return net.compute_gradients(images, labels, training, mask);
  };
  loss();
  auto blocks = net.parameters();
  std::vector<std::vector<double>> analytic;
  for (auto& b : blocks) analytic.emplace_back(b.gradients.begin(), b.gradients.end());

  GradCheck out;
  const double delta = 1e-4;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    for (std::size_t i = 0; i < blocks[bi].values.size(); ++i) {
      double& w = blocks[bi].values[i];
      const double saved = w;
      w = saved + delta;
      const double up = loss();
      w = saved - delta;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2 * delta);
      const double a = analytic[bi][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
      out.max_relative = std::max(out.max_relative, rel);
      ++out.checked;
    }
  }
  return out;
}

}  // namespace landlab::oracle
