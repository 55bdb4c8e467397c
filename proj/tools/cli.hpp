#pragma once

// Batch front-end: walk | evolve | measure | reproduce.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace landlab::cli {

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kBadConfig = 2;
inline constexpr int kIoError = 3;

struct Options {
  std::filesystem::path config;
  std::filesystem::path out = "out";
  std::filesystem::path trace_dir;  // measure only; defaults to `out`
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Output directory after applying the LANDSCAPE_LAB_OUT override.
std::filesystem::path resolve_out(const std::filesystem::path& flag);

int cmd_walk(const Options& o, std::ostream& log, std::ostream& err);
int cmd_evolve(const Options& o, std::ostream& log, std::ostream& err);
int cmd_measure(const Options& o, std::ostream& log, std::ostream& err);
int cmd_reproduce(const Options& o, std::ostream& log, std::ostream& err);

/// Parses arguments and dispatches; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace landlab::cli
