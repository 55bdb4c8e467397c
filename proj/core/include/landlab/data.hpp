#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "landlab/random.hpp"

namespace landlab {

/// Images stored N x H x W x C (channel fastest) with pixels in [0, 1].
struct ImageSet {
  std::size_t count = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> pixels;
  std::vector<int> labels;

  std::size_t image_size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  std::span<const float> image(std::size_t i) const {
    return std::span<const float>(pixels).subspan(i * image_size(), image_size());
  }
};

struct DatasetSplit {
  std::string name;
  int class_count = 0;
  ImageSet train;
  ImageSet test;
};

/// Raw 8-bit images as read from IDX files.
struct RawDataset {
  std::size_t count = 0;
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint8_t> labels;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image file and its label file. Throws ParseError naming the
/// file and byte offset on bad magic, truncation or a count mismatch.
RawDataset load_idx(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path);

/// Writes the IDX pair for a single-channel raw dataset.
void write_idx(const RawDataset& raw, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path);

/// Draws disjoint train/test subsets from one pool, scaling pixels by 1/255.
DatasetSplit make_split(const RawDataset& pool, std::size_t train_n, std::size_t test_n, Rng& rng,
                        std::string name = "dataset", int class_count = 0);

/// Subsamples canonical train and test pools independently.
DatasetSplit make_split(const RawDataset& train_pool, const RawDataset& test_pool,
                        std::size_t train_n, std::size_t test_n, Rng& rng,
                        std::string name = "dataset", int class_count = 0);

/// Class-conditional blob images that a small CNN can separate. The train
/// set holds `per_class` images of every class; the test set half as many
/// (at least one).
DatasetSplit synthetic(int class_count, std::size_t per_class, int height, int width, int channels,
                       Rng& rng, std::string name = "synthetic");

/// Empty when the split satisfies its invariants.
std::vector<std::string> check_split(const DatasetSplit& d);

}  // namespace landlab
