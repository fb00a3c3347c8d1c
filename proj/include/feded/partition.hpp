#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace feded {

// Disjoint, exhaustive assignment of sample indices to clients. Every client
// holds at least one sample.
struct Partition {
  std::vector<std::vector<size_t>> assignments;   // N index lists
  std::vector<std::vector<int64_t>> count_matrix; // N x C

  int num_clients() const { return static_cast<int>(assignments.size()); }
  int num_classes() const {
    return count_matrix.empty() ? 0 : static_cast<int>(count_matrix[0].size());
  }
};

// For each class independently, split its (seed-shuffled) indices across
// clients by Dirichlet(beta * 1_N) proportions. Partitions that leave some
// client empty are redrawn with an incremented sub-seed, up to 100 retries.
Partition dirichlet_partition(std::span<const int> labels, int num_classes, int num_clients,
                              double beta, uint64_t seed);

// Label-sorted data cut into N*s label-pure shards (shard counts per class
// proportional to class sizes, remainders enlarging the tail shards), shard
// order shuffled, s shards dealt to each client. Every client consequently
// holds at most s distinct labels.
Partition quantity_shard_partition(std::span<const int> labels, int num_classes, int num_clients,
                                   int shards_per_client, uint64_t seed);

struct PartitionStats {
  std::vector<size_t> samples_per_client;
  std::vector<int> empty_classes_per_client;       // |O| per client
  std::vector<int> distinct_labels_per_client;
  std::vector<std::vector<int64_t>> count_matrix;  // heatmap-ready copy
};

PartitionStats partition_stats(const Partition& partition);

// {"clients": [[indices...]], "counts": [[N x C]]} for reproducibility audits.
std::string partition_to_json(const Partition& partition);
Partition partition_from_json(const std::string& text);

}  // namespace feded
