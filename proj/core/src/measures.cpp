#include "landlab/measures.hpp"

#include <algorithm>
#include <cmath>

#include "landlab/errors.hpp"

namespace landlab {

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

std::string_view to_string(Ruggedness r) {
  switch (r) {
    case Ruggedness::Smooth: return "smooth";
    case Ruggedness::Uncertain: return "uncertain";
    case Ruggedness::Hard: return "hard";
  }
  return "?";
}

double autocorrelation(std::span<const double> f, std::size_t k) {
  if (k == 0 || k >= f.size()) {
    throw MeasureError("autocorrelation step " + std::to_string(k) +
                       " is outside [1, length) for a series of length " +
                       std::to_string(f.size()));
  }
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(f.size());

  double den = 0.0;
  for (double v : f) den += (v - mean) * (v - mean);
  if (!(den > 0.0)) throw MeasureError("autocorrelation undefined for a constant series");

  double num = 0.0;
  for (std::size_t t = 0; t + k < f.size(); ++t) num += (f[t] - mean) * (f[t + k] - mean);
  return num / den;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw MeasureError("quantile of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) return {};
  BoxStats b;
  b.count = values.size();
  b.min = *std::min_element(values.begin(), values.end());
  b.max = *std::max_element(values.begin(), values.end());
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  return b;
}

Ruggedness classify(std::span<const double> rho, double threshold) {
  if (rho.empty()) throw MeasureError("classification needs at least one autocorrelation value");
  const double q1 = quantile(rho, 0.25);
  const double q3 = quantile(rho, 0.75);
  if (q1 > threshold) return Ruggedness::Smooth;
  if (q3 < threshold) return Ruggedness::Hard;
  return Ruggedness::Uncertain;
}

std::vector<Symbol> encode_steps(std::span<const double> f, double epsilon) {
  if (epsilon < 0.0) throw MeasureError("epsilon must be non-negative");
  std::vector<Symbol> out;
  if (f.size() < 2) return out;
  out.reserve(f.size() - 1);
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double d = f[i] - f[i - 1];
    out.push_back(d < -epsilon ? Symbol{-1} : d > epsilon ? Symbol{1} : Symbol{0});
  }
  return out;
}

double entropy(std::span<const Symbol> s) {
  if (s.size() < 2) throw MeasureError("entropy needs at least two symbols");
  // counts[p+1][q+1] for the ordered pair (p, q)
  std::size_t counts[3][3] = {};
  for (std::size_t i = 0; i + 1 < s.size(); ++i) ++counts[s[i] + 1][s[i + 1] + 1];
  const auto blocks = static_cast<double>(s.size() - 1);
  const double log6 = std::log(6.0);
  double h = 0.0;
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) {
      if (p == q || counts[p][q] == 0) continue;
      const double prob = static_cast<double>(counts[p][q]) / blocks;
      h -= prob * std::log(prob) / log6;
    }
  }
  return h;
}

double information_stability(std::span<const double> f) {
  double e = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) e = std::max(e, std::abs(f[i] - f[i - 1]));
  return e;
}

std::array<double, kEpsilonSchedulePoints> epsilon_fractions() {
  return {0.0, 1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0};
}

std::array<double, kEpsilonSchedulePoints> epsilon_schedule(double epsilon_star) {
  auto s = epsilon_fractions();
  for (double& e : s) e *= epsilon_star;
  return s;
}

AutocorrelationReport autocorrelation_report(std::span<const FitnessSeries> walks,
                                             std::span<const std::size_t> steps,
                                             double threshold) {
  AutocorrelationReport r;
  r.threshold = threshold;
  for (Split split : {Split::Train, Split::Test}) {
    const bool any = std::any_of(walks.begin(), walks.end(),
                                 [split](const FitnessSeries& w) { return w.split == split; });
    if (!any) continue;
    for (std::size_t k : steps) {
      AutocorrelationGroup g;
      g.k = k;
      g.split = split;
      for (const auto& w : walks) {
        if (w.split != split) continue;
        try {
          g.rho.push_back(autocorrelation(w.values, k));
          g.walk_ids.push_back(w.walk_id);
        } catch (const MeasureError&) {
          ++g.undefined;
        }
      }
      g.box = box_stats(g.rho);
      g.classification = g.rho.empty() ? Ruggedness::Uncertain : classify(g.rho, threshold);
      r.groups.push_back(std::move(g));
    }
  }
  return r;
}

EntropyReport emr_report(std::span<const FitnessSeries> walks) {
  if (walks.empty()) throw MeasureError("entropic measure needs at least one walk");
  EntropyReport r;
  for (const auto& w : walks) {
    const double estar = information_stability(w.values);
    const auto schedule = epsilon_schedule(estar);
    std::array<double, kEpsilonSchedulePoints> h{};
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      h[i] = entropy(encode_steps(w.values, schedule[i]));
    }
    r.walk_ids.push_back(w.walk_id);
    r.epsilon_star.push_back(estar);
    r.schedule.push_back(schedule);
    r.h_curve.push_back(h);
  }
  for (std::size_t i = 0; i < kEpsilonSchedulePoints; ++i) {
    double sum = 0.0;
    for (const auto& h : r.h_curve) sum += h[i];
    r.h_bar[i] = sum / static_cast<double>(r.h_curve.size());
  }
  r.r_f = *std::max_element(r.h_bar.begin(), r.h_bar.end());
  return r;
}

}  // namespace landlab
