#include "landlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "landlab/errors.hpp"

namespace landlab {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off, const std::string& file) {
  if (b.size() < off + 4) throw ParseError(file, 0, off, "truncated IDX header");
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

int max_label(const std::vector<std::uint8_t>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

ImageSet gather(const RawDataset& raw, std::span<const std::size_t> idx) {
  ImageSet s;
  s.count = idx.size();
  s.height = raw.height;
  s.width = raw.width;
  s.channels = raw.channels;
  const std::size_t sz = s.image_size();
  s.pixels.resize(s.count * sz);
  s.labels.resize(s.count);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const std::uint8_t* src = raw.pixels.data() + idx[i] * sz;
    float* dst = s.pixels.data() + i * sz;
    for (std::size_t j = 0; j < sz; ++j) dst[j] = static_cast<float>(src[j]) / 255.0f;
    s.labels[i] = raw.labels[idx[i]];
  }
  return s;
}

/// First `n` entries of a seeded permutation of [0, pool).
std::vector<std::size_t> sample_indices(std::size_t pool, std::size_t n, Rng& rng) {
  std::vector<std::size_t> all(pool);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(all[i], all[i + uniform_index(rng, pool - i)]);
  }
  all.resize(n);
  return all;
}

}  // namespace

RawDataset load_idx(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path) {
  const std::string ifile = images_path.string();
  const std::string lfile = labels_path.string();
  const auto ib = read_file(images_path);
  const auto lb = read_file(labels_path);

  if (be32(ib, 0, ifile) != kIdxImageMagic) {
    throw ParseError(ifile, 0, 0, "bad IDX image magic (expected 0x00000803)");
  }
  if (be32(lb, 0, lfile) != kIdxLabelMagic) {
    throw ParseError(lfile, 0, 0, "bad IDX label magic (expected 0x00000801)");
  }
  RawDataset raw;
  raw.count = be32(ib, 4, ifile);
  raw.height = static_cast<int>(be32(ib, 8, ifile));
  raw.width = static_cast<int>(be32(ib, 12, ifile));
  raw.channels = 1;
  const std::size_t label_count = be32(lb, 4, lfile);

  const std::size_t payload = raw.count * static_cast<std::size_t>(raw.height) *
                              static_cast<std::size_t>(raw.width);
  if (ib.size() < 16 + payload) {
    throw ParseError(ifile, 0, ib.size(),
                     "truncated IDX image payload: expected " + std::to_string(16 + payload) +
                         " bytes");
  }
  if (lb.size() < 8 + label_count) {
    throw ParseError(lfile, 0, lb.size(),
                     "truncated IDX label payload: expected " + std::to_string(8 + label_count) +
                         " bytes");
  }
  if (label_count != raw.count) {
    throw ParseError(lfile, 0, 4,
                     "count mismatch: " + std::to_string(label_count) + " labels for " +
                         std::to_string(raw.count) + " images in " + ifile);
  }
  raw.pixels.assign(ib.begin() + 16, ib.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
  raw.labels.assign(lb.begin() + 8, lb.begin() + 8 + static_cast<std::ptrdiff_t>(label_count));
  return raw;
}

void write_idx(const RawDataset& raw, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path) {
  if (raw.channels != 1) throw ConfigError("IDX image files hold single-channel images");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img) throw IoError("cannot write " + images_path.string());
  if (!lab) throw IoError("cannot write " + labels_path.string());
  put_be32(img, kIdxImageMagic);
  put_be32(img, static_cast<std::uint32_t>(raw.count));
  put_be32(img, static_cast<std::uint32_t>(raw.height));
  put_be32(img, static_cast<std::uint32_t>(raw.width));
  img.write(reinterpret_cast<const char*>(raw.pixels.data()),
            static_cast<std::streamsize>(raw.pixels.size()));
  put_be32(lab, kIdxLabelMagic);
  put_be32(lab, static_cast<std::uint32_t>(raw.labels.size()));
  lab.write(reinterpret_cast<const char*>(raw.labels.data()),
            static_cast<std::streamsize>(raw.labels.size()));
  if (!img) throw IoError("write failed: " + images_path.string());
  if (!lab) throw IoError("write failed: " + labels_path.string());
}

DatasetSplit make_split(const RawDataset& pool, std::size_t train_n, std::size_t test_n, Rng& rng,
                        std::string name, int class_count) {
  if (train_n + test_n > pool.count) {
    throw ConfigError("insufficient data: requested " + std::to_string(train_n + test_n) +
                      " images from a pool of " + std::to_string(pool.count));
  }
  if (train_n == 0 || test_n == 0) throw ConfigError("train and test sizes must be positive");
  const auto idx = sample_indices(pool.count, train_n + test_n, rng);
  DatasetSplit d;
  d.name = std::move(name);
  d.class_count = class_count > 0 ? class_count : max_label(pool.labels) + 1;
  d.train = gather(pool, std::span(idx).first(train_n));
  d.test = gather(pool, std::span(idx).subspan(train_n));
  return d;
}

DatasetSplit make_split(const RawDataset& train_pool, const RawDataset& test_pool,
                        std::size_t train_n, std::size_t test_n, Rng& rng, std::string name,
                        int class_count) {
  if (train_n > train_pool.count || test_n > test_pool.count) {
    throw ConfigError("insufficient data: requested " + std::to_string(train_n) + "/" +
                      std::to_string(test_n) + " from pools of " +
                      std::to_string(train_pool.count) + "/" + std::to_string(test_pool.count));
  }
  if (train_n == 0 || test_n == 0) throw ConfigError("train and test sizes must be positive");
  if (train_pool.height != test_pool.height || train_pool.width != test_pool.width ||
      train_pool.channels != test_pool.channels) {
    throw ConfigError("train and test pools have different image shapes");
  }
  const auto train_idx = sample_indices(train_pool.count, train_n, rng);
  const auto test_idx = sample_indices(test_pool.count, test_n, rng);
  DatasetSplit d;
  d.name = std::move(name);
  d.class_count = class_count > 0
                      ? class_count
                      : std::max(max_label(train_pool.labels), max_label(test_pool.labels)) + 1;
  d.train = gather(train_pool, train_idx);
  d.test = gather(test_pool, test_idx);
  return d;
}

namespace {

ImageSet blob_images(int class_count, std::size_t per_class, int h, int w, int c, Rng& rng) {
  ImageSet s;
  s.count = per_class * static_cast<std::size_t>(class_count);
  s.height = h;
  s.width = w;
  s.channels = c;
  s.pixels.assign(s.count * s.image_size(), 0.0f);
  s.labels.resize(s.count);

  const double radius = 0.3 * std::min(h, w);
  const double sigma = std::max(0.75, 0.18 * std::min(h, w));
  std::normal_distribution<double> jitter(0.0, 0.35);
  std::uniform_real_distribution<double> noise(0.0, 0.15);

  std::size_t n = 0;
  // Interleave classes so labels are balanced in every prefix.
  for (std::size_t i = 0; i < per_class; ++i) {
    for (int k = 0; k < class_count; ++k, ++n) {
      const double angle = 2.0 * std::numbers::pi * k / class_count;
      const double cy = (h - 1) / 2.0 + radius * std::sin(angle) + jitter(rng);
      const double cx = (w - 1) / 2.0 + radius * std::cos(angle) + jitter(rng);
      float* img = s.pixels.data() + n * s.image_size();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
          const double blob = std::exp(-d2 / (2 * sigma * sigma));
          for (int ch = 0; ch < c; ++ch) {
            // Channel intensity varies with the class for multi-channel data.
            const double gain = c == 1 ? 1.0 : 0.5 + 0.5 * ((k + ch) % 2);
            const double v = 0.85 * gain * blob + noise(rng);
            img[(y * w + x) * c + ch] = static_cast<float>(std::clamp(v, 0.0, 1.0));
          }
        }
      }
      s.labels[n] = k;
    }
  }
  return s;
}

}  // namespace

DatasetSplit synthetic(int class_count, std::size_t per_class, int height, int width, int channels,
                       Rng& rng, std::string name) {
  if (class_count < 2) throw ConfigError("synthetic data needs at least 2 classes");
  if (per_class == 0) throw ConfigError("synthetic data needs at least one image per class");
  if (height < 1 || width < 1 || channels < 1) throw ConfigError("image dimensions must be >= 1");
  DatasetSplit d;
  d.name = std::move(name);
  d.class_count = class_count;
  d.train = blob_images(class_count, per_class, height, width, channels, rng);
  d.test = blob_images(class_count, std::max<std::size_t>(1, per_class / 2), height, width,
                       channels, rng);
  return d;
}

std::vector<std::string> check_split(const DatasetSplit& d) {
  std::vector<std::string> out;
  if (d.class_count < 1) out.push_back("class_count must be positive");
  for (const auto* part : {&d.train, &d.test}) {
    const char* which = part == &d.train ? "train" : "test";
    if (part->labels.size() != part->count) out.push_back(std::string(which) + ": label count");
    if (part->pixels.size() != part->count * part->image_size()) {
      out.push_back(std::string(which) + ": pixel buffer size");
    }
    for (int l : part->labels) {
      if (l < 0 || l >= d.class_count) {
        out.push_back(std::string(which) + ": label outside [0, class_count)");
        break;
      }
    }
    for (float p : part->pixels) {
      if (!(p >= 0.0f && p <= 1.0f)) {
        out.push_back(std::string(which) + ": pixel outside [0, 1]");
        break;
      }
    }
  }
  return out;
}

}  // namespace landlab
