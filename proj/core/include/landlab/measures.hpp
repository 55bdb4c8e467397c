#pragma once

// Landscape measures over walk fitness series: autocorrelation at step k,
// the 0.15 ruggedness classification, and the entropic measure of
// ruggedness (symbol encoding, entropy, information stability, R_f).

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace landlab {

enum class Split { Train, Test };
std::string_view to_string(Split s);

struct FitnessSeries {
  std::vector<double> values;
  std::string walk_id;
  Split split = Split::Train;
};

inline constexpr double kRuggednessThreshold = 0.15;

/// rho(k) = sum_{t=0}^{n-k} (f_t - m)(f_{t+k} - m) / sum_{t=0}^{n} (f_t - m)^2
/// with m the series mean. Throws MeasureError on zero variance or k >= length.
double autocorrelation(std::span<const double> series, std::size_t k);

enum class Ruggedness { Smooth, Uncertain, Hard };
std::string_view to_string(Ruggedness r);

/// Five-number summary with linearly interpolated quartiles.
struct BoxStats {
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Quantile with linear interpolation between closest ranks:
/// position q*(n-1) in the sorted values.
double quantile(std::span<const double> values, double q);
BoxStats box_stats(std::span<const double> values);

/// Smooth when the lower quartile is above the threshold, hard when the
/// upper quartile is below it, uncertain when the box touches or crosses it.
Ruggedness classify(std::span<const double> rho_values, double threshold = kRuggednessThreshold);

/// Step symbols: -1 down by more than epsilon, 0 within epsilon, +1 up.
using Symbol = std::int8_t;
std::vector<Symbol> encode_steps(std::span<const double> series, double epsilon);

/// -sum_{p != q} P[pq] log_6 P[pq] over consecutive symbol pairs.
double entropy(std::span<const Symbol> symbols);

/// Largest absolute step; the smallest epsilon that flattens the series.
double information_stability(std::span<const double> series);

inline constexpr std::size_t kEpsilonSchedulePoints = 9;
/// {0, e/128, e/64, e/32, e/16, e/8, e/4, e/2, e} for e = epsilon_star.
std::array<double, kEpsilonSchedulePoints> epsilon_schedule(double epsilon_star);
/// Schedule labels as fractions of epsilon*: 0, 1/128, ..., 1.
std::array<double, kEpsilonSchedulePoints> epsilon_fractions();

struct AutocorrelationGroup {
  std::size_t k = 0;
  Split split = Split::Train;
  std::vector<double> rho;  // one per walk with a defined value
  std::vector<std::string> walk_ids;
  std::size_t undefined = 0;  // walks skipped for zero variance or short length
  BoxStats box;
  Ruggedness classification = Ruggedness::Uncertain;
};

struct AutocorrelationReport {
  double threshold = kRuggednessThreshold;
  std::vector<AutocorrelationGroup> groups;
};

/// One group per (split, k). Series of the other split are ignored per group.
AutocorrelationReport autocorrelation_report(std::span<const FitnessSeries> walks,
                                             std::span<const std::size_t> steps,
                                             double threshold = kRuggednessThreshold);

struct EntropyReport {
  std::vector<std::string> walk_ids;
  std::vector<double> epsilon_star;  // per walk
  std::vector<std::array<double, kEpsilonSchedulePoints>> schedule;  // per walk
  std::vector<std::array<double, kEpsilonSchedulePoints>> h_curve;   // per walk
  std::array<double, kEpsilonSchedulePoints> h_bar{};               // mean over walks
  double r_f = 0.0;
};

EntropyReport emr_report(std::span<const FitnessSeries> walks);

}  // namespace landlab
