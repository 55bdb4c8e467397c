#pragma once

// CSV trace files and genotype logs.
//
//   walk_NN.csv             step,genotype_id,train_loss,test_loss,train_acc,test_acc
//   walk_NN.candidates.csv  step,candidate,genotype_id,train_loss,test_loss,train_acc,test_acc,selected
//   walk_NN.genotypes.txt   genotype records of s_0..s_n
//   run_NN.csv              generation,genotype_id,train_loss,test_loss,train_acc,test_acc
//   run_NN.genotypes.txt    genotype records of each generation's best
//
// Reals are written in shortest round-trip form; ids as 16 hex digits.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "landlab/walks.hpp"

namespace landlab {

struct TraceRow {
  std::size_t index = 0;  // step or generation
  std::uint64_t genotype_id = 0;
  FitnessPair fitness;
};

struct CandidateRow {
  std::size_t step = 0;
  std::size_t candidate = 0;
  std::uint64_t genotype_id = 0;
  FitnessPair fitness;
  bool selected = false;
};

inline constexpr std::string_view kWalkHeader =
    "step,genotype_id,train_loss,test_loss,train_acc,test_acc";
inline constexpr std::string_view kCandidateHeader =
    "step,candidate,genotype_id,train_loss,test_loss,train_acc,test_acc,selected";
inline constexpr std::string_view kEvolutionHeader =
    "generation,genotype_id,train_loss,test_loss,train_acc,test_acc";

std::string format_real(double x);
std::string format_id(std::uint64_t id);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

std::string walk_csv(const WalkTrace& trace);
std::string candidates_csv(const WalkTrace& trace);
std::string evolution_csv(const EvolutionTrace& trace);
std::string genotype_log(std::span<const ScoredGenotype> items);

/// Parses a walk or evolution trace. Throws ParseError naming file and line.
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);
std::vector<CandidateRow> read_candidates_csv(const std::filesystem::path& path);
std::vector<Genotype> read_genotype_log(const std::filesystem::path& path);

}  // namespace landlab
