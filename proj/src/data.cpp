#include "feded/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "feded/error.hpp"
#include "feded/rng.hpp"

namespace feded {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

uint32_t read_be32(std::ifstream& in, const std::string& path, const char* field) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw IngestionError(path + ": truncated while reading " + field);
  }
  return (uint32_t(buf[0]) << 24) | (uint32_t(buf[1]) << 16) | (uint32_t(buf[2]) << 8) |
         uint32_t(buf[3]);
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IngestionError("cannot open images file " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IngestionError("cannot open labels file " + labels_path);

  const uint32_t img_magic = read_be32(img, images_path, "magic");
  if (img_magic != kImagesMagic) {
    char hex[16];
    std::snprintf(hex, sizeof(hex), "0x%08x", img_magic);
    throw IngestionError(images_path + ": bad images magic " + hex);
  }
  const uint32_t lab_magic = read_be32(lab, labels_path, "magic");
  if (lab_magic != kLabelsMagic) {
    char hex[16];
    std::snprintf(hex, sizeof(hex), "0x%08x", lab_magic);
    throw IngestionError(labels_path + ": bad labels magic " + hex);
  }

  const uint32_t n_images = read_be32(img, images_path, "image count");
  const uint32_t n_rows = read_be32(img, images_path, "row count");
  const uint32_t n_cols = read_be32(img, images_path, "column count");
  const uint32_t n_labels = read_be32(lab, labels_path, "label count");
  if (n_images != n_labels) {
    throw IngestionError("image count " + std::to_string(n_images) + " != label count " +
                         std::to_string(n_labels));
  }
  if (n_images == 0) throw IngestionError(images_path + ": empty image file");

  const int d = static_cast<int>(n_rows * n_cols);
  Dataset ds;
  ds.features = Matrix(static_cast<int>(n_images), d);
  ds.labels.resize(n_images);
  ds.num_classes = 10;

  std::vector<unsigned char> pixel_row(d);
  for (uint32_t i = 0; i < n_images; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixel_row.data()), d)) {
      throw IngestionError(images_path + ": truncated pixel data at image " + std::to_string(i));
    }
    double* out = ds.features.row(static_cast<int>(i));
    for (int j = 0; j < d; ++j) out[j] = pixel_row[j] / 255.0;
  }
  std::vector<unsigned char> raw_labels(n_labels);
  if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), n_labels)) {
    throw IngestionError(labels_path + ": truncated label data");
  }
  for (uint32_t i = 0; i < n_labels; ++i) {
    if (raw_labels[i] > 9) {
      throw IngestionError(labels_path + ": label byte " + std::to_string(raw_labels[i]) +
                           " out of range at index " + std::to_string(i));
    }
    ds.labels[i] = raw_labels[i];
  }
  return ds;
}

std::pair<Dataset, Dataset> gen_synthetic(int num_classes, int dim, int per_class, double sigma,
                                          uint64_t seed, double separation) {
  if (num_classes < 2 || dim < 2) {
    throw ConfigError("gen_synthetic: need num_classes >= 2 and dim >= 2");
  }
  if (per_class < 5 || sigma <= 0.0) {
    throw ConfigError("gen_synthetic: need per_class >= 5 and sigma > 0");
  }
  Rng rng(combine_seeds(seed, 0x73796e7468ULL));

  Matrix means(num_classes, dim);
  for (double& m : means.data) m = separation * rng.normal();

  const int n_test = per_class / 5;  // 80/20 stratified
  const int n_train = per_class - n_test;
  Dataset train, test;
  train.features = Matrix(n_train * num_classes, dim);
  train.labels.resize(static_cast<size_t>(n_train) * num_classes);
  train.num_classes = num_classes;
  train.split = "train";
  test.features = Matrix(n_test * num_classes, dim);
  test.labels.resize(static_cast<size_t>(n_test) * num_classes);
  test.num_classes = num_classes;
  test.split = "test";

  int ti = 0, si = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (int k = 0; k < per_class; ++k) {
      const bool is_test = k < n_test;
      double* out = is_test ? test.features.row(si) : train.features.row(ti);
      for (int j = 0; j < dim; ++j) out[j] = means(c, j) + sigma * rng.normal();
      if (is_test) {
        test.labels[si++] = c;
      } else {
        train.labels[ti++] = c;
      }
    }
  }

  // Rescale into [-1, 1] like the image loaders do. Class geometry is
  // unaffected: means and noise shrink together.
  double max_abs = 0.0;
  for (double v : train.features.data) max_abs = std::max(max_abs, std::abs(v));
  for (double v : test.features.data) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs > 0.0) {
    for (double& v : train.features.data) v /= max_abs;
    for (double& v : test.features.data) v /= max_abs;
  }
  return {std::move(train), std::move(test)};
}

Dataset stratified_subset(const Dataset& ds, double fraction, uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw ConfigError("stratified_subset: fraction must be in (0, 1]");
  }
  std::vector<std::vector<size_t>> by_class(ds.num_classes);
  for (size_t i = 0; i < ds.labels.size(); ++i) {
    by_class[ds.labels[i]].push_back(i);
  }
  Rng rng(combine_seeds(seed, 0x737562736574ULL));
  std::vector<size_t> keep;
  for (auto& idxs : by_class) {
    rng.shuffle(idxs);
    const size_t n = static_cast<size_t>(std::ceil(fraction * static_cast<double>(idxs.size())));
    keep.insert(keep.end(), idxs.begin(), idxs.begin() + n);
  }
  std::sort(keep.begin(), keep.end());

  Dataset out;
  out.features = Matrix(static_cast<int>(keep.size()), ds.dim());
  out.labels.resize(keep.size());
  out.num_classes = ds.num_classes;
  out.split = ds.split;
  for (size_t i = 0; i < keep.size(); ++i) {
    const double* src = ds.features.row(static_cast<int>(keep[i]));
    std::copy(src, src + ds.dim(), out.features.row(static_cast<int>(i)));
    out.labels[i] = ds.labels[keep[i]];
  }
  return out;
}

BatchStream::BatchStream(const Dataset& dataset, std::span<const size_t> indices, int batch_size,
                         uint64_t epoch_seed)
    : dataset_(dataset), order_(indices.begin(), indices.end()), batch_size_(batch_size) {
  if (order_.empty()) throw UsageError("BatchStream: empty index list");
  if (batch_size_ < 1) throw UsageError("BatchStream: batch size must be >= 1");
  for (size_t i : order_) {
    if (i >= static_cast<size_t>(dataset_.size())) {
      throw UsageError("BatchStream: index out of range");
    }
  }
  Rng rng(epoch_seed);
  rng.shuffle(order_);
}

bool BatchStream::next(Batch& out) {
  if (pos_ >= order_.size()) return false;
  const size_t n = std::min(static_cast<size_t>(batch_size_), order_.size() - pos_);
  out.features = Matrix(static_cast<int>(n), dataset_.dim());
  out.labels.resize(n);
  for (size_t k = 0; k < n; ++k) {
    const size_t idx = order_[pos_ + k];
    const double* src = dataset_.features.row(static_cast<int>(idx));
    std::copy(src, src + dataset_.dim(), out.features.row(static_cast<int>(k)));
    out.labels[k] = dataset_.labels[idx];
  }
  pos_ += n;
  return true;
}

int BatchStream::num_batches() const {
  return static_cast<int>((order_.size() + batch_size_ - 1) / batch_size_);
}

}  // namespace feded
