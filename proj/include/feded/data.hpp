#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "feded/matrix.hpp"

namespace feded {

struct Dataset {
  Matrix features;          // [M x d], values in a normalized range
  std::vector<int> labels;  // [M], class indices in [0, num_classes)
  int num_classes = 0;
  std::string split;        // "train" or "test"

  int size() const { return features.rows; }
  int dim() const { return features.cols; }
};

// IDX binary format: big-endian magic 0x00000803 (images) / 0x00000801
// (labels), then dimension sizes, then raw bytes. Pixels are scaled to [0,1].
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

// Gaussian clusters: class means drawn from a seeded standard normal scaled
// by `separation`, samples = mean + sigma * noise. 80/20 stratified split.
std::pair<Dataset, Dataset> gen_synthetic(int num_classes, int dim, int per_class, double sigma,
                                          uint64_t seed, double separation = 1.0);

// Stratified subsample keeping ceil(fraction * count) of each class.
Dataset stratified_subset(const Dataset& ds, double fraction, uint64_t seed);

struct Batch {
  Matrix features;          // [B x d]
  std::vector<int> labels;  // [B]
};

// One epoch over `indices` in a seed-shuffled order. The final partial batch
// is emitted, and every index appears exactly once.
class BatchStream {
 public:
  BatchStream(const Dataset& dataset, std::span<const size_t> indices, int batch_size,
              uint64_t epoch_seed);

  // Fills `out` and returns true, or returns false at end of epoch.
  bool next(Batch& out);

  int num_batches() const;

 private:
  const Dataset& dataset_;
  std::vector<size_t> order_;
  int batch_size_;
  size_t pos_ = 0;
};

}  // namespace feded
