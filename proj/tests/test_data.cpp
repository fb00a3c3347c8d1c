#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "feded/data.hpp"
#include "feded/error.hpp"

using namespace feded;

namespace {

namespace fs = std::filesystem;

void put_be32(std::ofstream& out, uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<char*>(buf), 4);
}

struct IdxFixture {
  fs::path images;
  fs::path labels;
};

// Two 2x2 images with known pixel bytes and labels [3, 7].
IdxFixture write_fixture(const fs::path& dir, uint32_t images_magic = 0x00000803,
                         uint32_t labels_magic = 0x00000801, uint32_t label_count = 2,
                         bool truncate_pixels = false) {
  fs::create_directories(dir);
  IdxFixture fx{dir / "imgs.idx", dir / "labs.idx"};
  {
    std::ofstream out(fx.images, std::ios::binary);
    put_be32(out, images_magic);
    put_be32(out, 2);  // images
    put_be32(out, 2);  // rows
    put_be32(out, 2);  // cols
    const unsigned char pixels[8] = {0, 51, 102, 255, 10, 20, 30, 40};
    out.write(reinterpret_cast<const char*>(pixels), truncate_pixels ? 5 : 8);
  }
  {
    std::ofstream out(fx.labels, std::ios::binary);
    put_be32(out, labels_magic);
    put_be32(out, label_count);
    const unsigned char labs[3] = {3, 7, 1};
    out.write(reinterpret_cast<const char*>(labs), label_count);
  }
  return fx;
}

}  // namespace

TEST_CASE("IDX fixture round-trips exact pixel values") {
  IdxFixture fx = write_fixture("idx_ok");
  Dataset ds = load_mnist_idx(fx.images.string(), fx.labels.string());
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 4);
  CHECK(ds.num_classes == 10);
  CHECK(ds.features(0, 0) == 0.0);
  CHECK(ds.features(0, 1) == doctest::Approx(51.0 / 255.0).epsilon(1e-15));
  CHECK(ds.features(0, 3) == 1.0);
  CHECK(ds.features(1, 2) == doctest::Approx(30.0 / 255.0).epsilon(1e-15));
  CHECK(ds.labels == std::vector<int>{3, 7});
}

TEST_CASE("IDX loader rejects a wrong magic") {
  IdxFixture fx = write_fixture("idx_badmagic", 0x00000801);  // labels magic on images file
  CHECK_THROWS_AS(load_mnist_idx(fx.images.string(), fx.labels.string()), IngestionError);
  IdxFixture fx2 = write_fixture("idx_badmagic2", 0x00000803, 0x00000803);
  CHECK_THROWS_AS(load_mnist_idx(fx2.images.string(), fx2.labels.string()), IngestionError);
}

TEST_CASE("IDX loader rejects count mismatch and truncation") {
  IdxFixture fx = write_fixture("idx_mismatch", 0x00000803, 0x00000801, 3);
  CHECK_THROWS_AS(load_mnist_idx(fx.images.string(), fx.labels.string()), IngestionError);
  IdxFixture fx2 = write_fixture("idx_trunc", 0x00000803, 0x00000801, 2, true);
  CHECK_THROWS_AS(load_mnist_idx(fx2.images.string(), fx2.labels.string()), IngestionError);
  CHECK_THROWS_AS(load_mnist_idx("no_such_file.idx", fx.labels.string()), IngestionError);
}

TEST_CASE("synthetic data is deterministic per seed") {
  auto [train_a, test_a] = gen_synthetic(4, 6, 25, 0.8, 99);
  auto [train_b, test_b] = gen_synthetic(4, 6, 25, 0.8, 99);
  CHECK(train_a.features.data == train_b.features.data);
  CHECK(test_a.features.data == test_b.features.data);
  CHECK(train_a.labels == train_b.labels);
  auto [train_c, test_c] = gen_synthetic(4, 6, 25, 0.8, 100);
  CHECK(train_a.features.data != train_c.features.data);
}

TEST_CASE("synthetic split is stratified 80/20") {
  auto [train, test] = gen_synthetic(5, 8, 50, 1.0, 3);
  CHECK(train.size() == 5 * 40);
  CHECK(test.size() == 5 * 10);
  std::vector<int> train_hist(5, 0), test_hist(5, 0);
  for (int y : train.labels) ++train_hist[y];
  for (int y : test.labels) ++test_hist[y];
  for (int c = 0; c < 5; ++c) {
    CHECK(train_hist[c] == 40);
    CHECK(test_hist[c] == 10);
  }
}

TEST_CASE("tiny sigma clusters are separable by nearest class mean") {
  auto [train, test] = gen_synthetic(6, 10, 30, 1e-4, 17);
  // class means from train
  Matrix means(6, 10);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < train.size(); ++i) {
    const int y = train.labels[i];
    for (int j = 0; j < 10; ++j) means(y, j) += train.features(i, j);
    ++counts[y];
  }
  for (int c = 0; c < 6; ++c) {
    for (int j = 0; j < 10; ++j) means(c, j) /= counts[c];
  }
  int correct = 0;
  for (int i = 0; i < test.size(); ++i) {
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < 6; ++c) {
      double d = 0.0;
      for (int j = 0; j < 10; ++j) {
        const double diff = test.features(i, j) - means(c, j);
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best == test.labels[i]) ++correct;
  }
  CHECK(correct == test.size());
}

TEST_CASE("gen_synthetic validates parameters") {
  CHECK_THROWS_AS(gen_synthetic(1, 8, 50, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(gen_synthetic(4, 1, 50, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(gen_synthetic(4, 8, 2, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(gen_synthetic(4, 8, 50, 0.0, 1), ConfigError);
}

TEST_CASE("batch iteration covers every index once with a partial tail") {
  auto [train, test] = gen_synthetic(3, 4, 10, 0.5, 5);
  std::vector<size_t> indices(10);
  std::iota(indices.begin(), indices.end(), 2);  // arbitrary subrange
  BatchStream stream(train, indices, 4, 123);
  CHECK(stream.num_batches() == 3);
  std::vector<size_t> sizes;
  std::vector<int> seen_labels;
  Batch batch;
  while (stream.next(batch)) {
    sizes.push_back(batch.labels.size());
    seen_labels.insert(seen_labels.end(), batch.labels.begin(), batch.labels.end());
  }
  CHECK(sizes == std::vector<size_t>{4, 4, 2});
  // recount: emitted labels are a permutation of the labels at the indices
  std::vector<int> want;
  for (size_t i : indices) want.push_back(train.labels[i]);
  std::sort(want.begin(), want.end());
  std::sort(seen_labels.begin(), seen_labels.end());
  CHECK(seen_labels == want);
}

TEST_CASE("batch order is deterministic per epoch seed") {
  auto [train, test] = gen_synthetic(3, 4, 10, 0.5, 5);
  std::vector<size_t> indices(train.size());
  std::iota(indices.begin(), indices.end(), 0);
  auto collect = [&](uint64_t seed) {
    BatchStream stream(train, indices, 7, seed);
    std::vector<int> labels;
    Batch b;
    while (stream.next(b)) labels.insert(labels.end(), b.labels.begin(), b.labels.end());
    return labels;
  };
  CHECK(collect(9) == collect(9));
  CHECK(collect(9) != collect(10));
}

TEST_CASE("batch stream rejects empty or invalid input") {
  auto [train, test] = gen_synthetic(3, 4, 10, 0.5, 5);
  std::vector<size_t> empty;
  CHECK_THROWS_AS(BatchStream(train, empty, 4, 1), UsageError);
  std::vector<size_t> bad{static_cast<size_t>(train.size())};
  CHECK_THROWS_AS(BatchStream(train, bad, 4, 1), UsageError);
}

TEST_CASE("stratified subset keeps per-class shares") {
  auto [train, test] = gen_synthetic(4, 6, 50, 1.0, 21);  // 40 per class in train
  Dataset sub = stratified_subset(train, 0.25, 3);
  std::vector<int> hist(4, 0);
  for (int y : sub.labels) ++hist[y];
  for (int c = 0; c < 4; ++c) CHECK(hist[c] == 10);
  Dataset sub2 = stratified_subset(train, 0.25, 3);
  CHECK(sub.features.data == sub2.features.data);
}
