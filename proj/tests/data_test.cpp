#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include "landlab/data.hpp"
#include "landlab/errors.hpp"
#include "test_support.hpp"

namespace landlab {
namespace {

namespace fs = std::filesystem;

using landlab::testing::TempDir;

// Image i carries its own index in the first two pixels.
RawDataset indexed_pool(std::size_t n, int h = 4, int w = 4, int classes = 10) {
  RawDataset r;
  r.count = n;
  r.height = h;
  r.width = w;
  r.pixels.assign(n * h * w, 0);
  for (std::size_t i = 0; i < n; ++i) {
    r.pixels[i * h * w] = static_cast<std::uint8_t>(i % 256);
    r.pixels[i * h * w + 1] = static_cast<std::uint8_t>(i / 256);
    r.pixels[i * h * w + 2] = 255;
    r.labels.push_back(static_cast<std::uint8_t>(i % classes));
  }
  return r;
}

std::set<std::size_t> ids(const ImageSet& s) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < s.count; ++i) {
    const auto img = s.image(i);
    out.insert(static_cast<std::size_t>(std::lround(img[0] * 255)) +
               256 * static_cast<std::size_t>(std::lround(img[1] * 255)));
  }
  return out;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

TEST(Idx, RoundTrip) {
  TempDir dir;
  const RawDataset raw = indexed_pool(300, 5, 6);
  write_idx(raw, dir.path() / "img", dir.path() / "lbl");
  const RawDataset back = load_idx(dir.path() / "img", dir.path() / "lbl");
  EXPECT_EQ(back.count, 300u);
  EXPECT_EQ(back.height, 5);
  EXPECT_EQ(back.width, 6);
  EXPECT_EQ(back.pixels, raw.pixels);
  EXPECT_EQ(back.labels, raw.labels);
  const auto bytes = read_bytes(dir.path() / "img");
  EXPECT_EQ(bytes[2], 0x08);
  EXPECT_EQ(bytes[3], 0x03);
  EXPECT_EQ(bytes.size(), 16u + 300 * 30);
}

TEST(Idx, WrongMagic) {
  TempDir dir;
  write_idx(indexed_pool(10), dir.path() / "img", dir.path() / "lbl");
  auto bytes = read_bytes(dir.path() / "img");
  bytes[3] = 0x01;
  write_bytes(dir.path() / "img", bytes);
  try {
    load_idx(dir.path() / "img", dir.path() / "lbl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.source().find("img"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
  // Swapped files are a magic mismatch too.
  write_idx(indexed_pool(10), dir.path() / "img", dir.path() / "lbl");
  EXPECT_THROW(load_idx(dir.path() / "lbl", dir.path() / "img"), ParseError);
}

TEST(Idx, TruncatedPayloadNamesOffset) {
  TempDir dir;
  write_idx(indexed_pool(10), dir.path() / "img", dir.path() / "lbl");
  auto bytes = read_bytes(dir.path() / "img");
  bytes.resize(bytes.size() - 7);
  write_bytes(dir.path() / "img", bytes);
  try {
    load_idx(dir.path() / "img", dir.path() / "lbl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), bytes.size());
  }
}

TEST(Idx, ShortLabelFileIsCountMismatch) {
  TempDir dir;
  write_idx(indexed_pool(10), dir.path() / "img", dir.path() / "lbl");
  RawDataset fewer = indexed_pool(9);
  write_idx(fewer, dir.path() / "img2", dir.path() / "lbl2");
  try {
    load_idx(dir.path() / "img", dir.path() / "lbl2");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.source().find("lbl2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("count"), std::string::npos) << e.what();
  }
}

TEST(Idx, MissingFileIsIoError) {
  EXPECT_THROW(load_idx("/nonexistent/img", "/nonexistent/lbl"), IoError);
}

TEST(Split, ShapesAndScaling) {
  const RawDataset pool = indexed_pool(5000, 28, 28);
  Rng rng(1);
  const DatasetSplit s = make_split(pool, 2000, 1000, rng, "mnist");
  EXPECT_EQ(s.train.count, 2000u);
  EXPECT_EQ(s.test.count, 1000u);
  EXPECT_EQ(s.train.height, 28);
  EXPECT_EQ(s.train.width, 28);
  EXPECT_EQ(s.train.channels, 1);
  EXPECT_EQ(s.train.pixels.size(), 2000u * 28 * 28);
  EXPECT_EQ(s.class_count, 10);
  EXPECT_TRUE(check_split(s).empty());
  // Pixel 2 of every image is 255, pixel 3 is 0.
  EXPECT_EQ(s.train.image(0)[2], 1.0f);
  EXPECT_EQ(s.train.image(0)[3], 0.0f);
}

TEST(Split, DisjointAndSeeded) {
  const RawDataset pool = indexed_pool(3000);
  Rng a(9), b(9), c(10);
  const DatasetSplit s1 = make_split(pool, 2000, 1000, a);
  const DatasetSplit s2 = make_split(pool, 2000, 1000, b);
  const DatasetSplit s3 = make_split(pool, 2000, 1000, c);
  const auto tr = ids(s1.train), te = ids(s1.test);
  EXPECT_EQ(tr.size(), 2000u);
  EXPECT_EQ(te.size(), 1000u);
  for (auto i : te) EXPECT_EQ(tr.count(i), 0u);
  EXPECT_EQ(s1.train.pixels, s2.train.pixels);
  EXPECT_EQ(s1.test.labels, s2.test.labels);
  EXPECT_NE(s1.train.pixels, s3.train.pixels);
}

TEST(Split, InsufficientDataIsConfigError) {
  const RawDataset pool = indexed_pool(100);
  Rng rng(1);
  EXPECT_THROW(make_split(pool, 80, 21, rng), ConfigError);
  EXPECT_NO_THROW(make_split(pool, 80, 20, rng));
  EXPECT_THROW(make_split(pool, indexed_pool(10), 50, 11, rng), ConfigError);
}

TEST(Split, SeparatePools) {
  const RawDataset train = indexed_pool(600), test = indexed_pool(200);
  Rng rng(4);
  const DatasetSplit s = make_split(train, test, 500, 150, rng);
  EXPECT_EQ(s.train.count, 500u);
  EXPECT_EQ(s.test.count, 150u);
  EXPECT_EQ(ids(s.train).size(), 500u);
  EXPECT_EQ(ids(s.test).size(), 150u);
  EXPECT_TRUE(check_split(s).empty());
}

TEST(Split, InvariantsHoldForRandomSizes) {
  const RawDataset pool = indexed_pool(400, 3, 3, 7);
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const std::size_t tr = 1 + uniform_index(rng, 300);
    const std::size_t te = 1 + uniform_index(rng, 400 - tr);
    const DatasetSplit s = make_split(pool, tr, te, rng);
    ASSERT_TRUE(check_split(s).empty());
    ASSERT_EQ(s.train.count + s.test.count, tr + te);
  }
}

TEST(Split, SameSeedBitIdenticalFromFiles) {
  TempDir dir;
  write_idx(indexed_pool(500, 8, 8), dir.path() / "img", dir.path() / "lbl");
  Rng a(3), b(3);
  const DatasetSplit x = make_split(load_idx(dir.path() / "img", dir.path() / "lbl"), 300, 100, a);
  const DatasetSplit y = make_split(load_idx(dir.path() / "img", dir.path() / "lbl"), 300, 100, b);
  EXPECT_EQ(x.train.pixels, y.train.pixels);
  EXPECT_EQ(x.train.labels, y.train.labels);
  EXPECT_EQ(x.test.pixels, y.test.pixels);
}

TEST(Synthetic, BalancedDeterministicAndValid) {
  Rng a(5), b(5);
  const DatasetSplit s = synthetic(4, 50, 8, 8, 2, a);
  const DatasetSplit t = synthetic(4, 50, 8, 8, 2, b);
  EXPECT_EQ(s.train.pixels, t.train.pixels);
  EXPECT_EQ(s.train.count, 200u);
  EXPECT_EQ(s.test.count, 100u);
  EXPECT_EQ(s.train.channels, 2);
  EXPECT_TRUE(check_split(s).empty());
  std::array<int, 4> counts{};
  for (int l : s.train.labels) ++counts[l];
  for (int c : counts) EXPECT_EQ(c, 50);
}

TEST(Synthetic, DegenerateArguments) {
  Rng rng(1);
  EXPECT_THROW(synthetic(1, 10, 8, 8, 1, rng), ConfigError);
  EXPECT_THROW(synthetic(2, 0, 8, 8, 1, rng), ConfigError);
}

TEST(CheckSplit, ReportsBrokenInvariants) {
  Rng rng(1);
  DatasetSplit s = synthetic(2, 5, 4, 4, 1, rng);
  s.train.labels[0] = 2;
  s.test.pixels[0] = 1.5f;
  EXPECT_EQ(check_split(s).size(), 2u);
}

TEST(Mnist, SubsampleFromRealFiles) {
  const char* dir = std::getenv("LANDSCAPE_LAB_MNIST_DIR");
  if (!dir) GTEST_SKIP() << "LANDSCAPE_LAB_MNIST_DIR not set";
  const fs::path d(dir);
  const RawDataset raw = load_idx(d / "images-idx3-ubyte", d / "labels-idx1-ubyte");
  EXPECT_EQ(raw.height, 28);
  EXPECT_EQ(raw.width, 28);
  Rng rng(1);
  const DatasetSplit s = make_split(raw, 2000, 1000, rng, "mnist");
  EXPECT_EQ(s.train.pixels.size(), 2000u * 28 * 28);
  EXPECT_EQ(s.test.pixels.size(), 1000u * 28 * 28);
  EXPECT_EQ(s.class_count, 10);
}

}  // namespace
}  // namespace landlab
