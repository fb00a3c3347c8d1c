#include "feded/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "feded/error.hpp"
#include "feded/rng.hpp"

namespace feded {

namespace {

std::vector<std::vector<size_t>> indices_by_class(std::span<const int> labels, int num_classes) {
  if (labels.empty()) throw PartitionError("partition: empty label list");
  std::vector<std::vector<size_t>> by_class(num_classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= num_classes) {
      throw PartitionError("partition: label " + std::to_string(y) + " out of range");
    }
    by_class[y].push_back(i);
  }
  return by_class;
}

void finalize_counts(Partition& part, std::span<const int> labels, int num_classes) {
  part.count_matrix.assign(part.assignments.size(), std::vector<int64_t>(num_classes, 0));
  for (size_t i = 0; i < part.assignments.size(); ++i) {
    for (size_t idx : part.assignments[i]) {
      ++part.count_matrix[i][labels[idx]];
    }
  }
}

}  // namespace

Partition dirichlet_partition(std::span<const int> labels, int num_classes, int num_clients,
                              double beta, uint64_t seed) {
  if (num_clients < 1) throw PartitionError("dirichlet_partition: need at least one client");
  if (beta <= 0.0) throw PartitionError("dirichlet_partition: beta must be positive");
  if (labels.size() < static_cast<size_t>(num_clients)) {
    throw PartitionError("dirichlet_partition: fewer samples than clients");
  }
  auto by_class = indices_by_class(labels, num_classes);

  constexpr int kMaxRetries = 100;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    Rng rng(combine_seeds(seed, static_cast<uint64_t>(attempt), 0x646972ULL));
    Partition part;
    part.assignments.assign(num_clients, {});

    bool redraw = false;
    for (int c = 0; c < num_classes && !redraw; ++c) {
      std::vector<size_t> idxs = by_class[c];
      if (idxs.empty()) continue;
      rng.shuffle(idxs);

      std::vector<double> w(num_clients);
      double total = 0.0;
      for (int i = 0; i < num_clients; ++i) {
        w[i] = rng.gamma(beta);
        total += w[i];
      }
      if (total <= 0.0) {
        redraw = true;  // all gammas underflowed; try a fresh draw
        break;
      }
      // Cut the shuffled class indices at the cumulative proportions.
      const size_t n = idxs.size();
      double cum = 0.0;
      size_t start = 0;
      for (int i = 0; i < num_clients; ++i) {
        cum += w[i] / total;
        size_t end = (i + 1 == num_clients)
                         ? n
                         : std::min(n, static_cast<size_t>(std::floor(cum * n)));
        for (size_t k = start; k < end; ++k) part.assignments[i].push_back(idxs[k]);
        start = std::max(start, end);
      }
    }
    if (redraw) continue;

    bool any_empty = false;
    for (const auto& a : part.assignments) {
      if (a.empty()) {
        any_empty = true;
        break;
      }
    }
    if (any_empty) continue;

    finalize_counts(part, labels, num_classes);
    return part;
  }
  throw PartitionError("dirichlet_partition: retries exhausted leaving some client empty (N = " +
                       std::to_string(num_clients) + ", samples = " +
                       std::to_string(labels.size()) + ")");
}

Partition quantity_shard_partition(std::span<const int> labels, int num_classes, int num_clients,
                                   int shards_per_client, uint64_t seed) {
  if (num_clients < 1 || shards_per_client < 1) {
    throw PartitionError("quantity_shard_partition: need N >= 1 and s >= 1");
  }
  const size_t total_shards = static_cast<size_t>(num_clients) * shards_per_client;
  if (total_shards > labels.size()) {
    throw PartitionError("quantity_shard_partition: N*s = " + std::to_string(total_shards) +
                         " exceeds dataset size " + std::to_string(labels.size()));
  }
  auto by_class = indices_by_class(labels, num_classes);

  std::vector<int> observed;
  for (int c = 0; c < num_classes; ++c) {
    if (!by_class[c].empty()) observed.push_back(c);
  }
  if (observed.size() > total_shards) {
    throw PartitionError("quantity_shard_partition: " + std::to_string(observed.size()) +
                         " observed classes need more than N*s = " +
                         std::to_string(total_shards) + " label-pure shards");
  }

  // Apportion shards to classes: one each, then highest-average (count/shards)
  // while capacity (one sample per shard) allows. Ties break on class index.
  std::vector<size_t> shards_for(num_classes, 0);
  size_t assigned = 0;
  for (int c : observed) {
    shards_for[c] = 1;
    ++assigned;
  }
  while (assigned < total_shards) {
    int best = -1;
    double best_avg = -1.0;
    for (int c : observed) {
      if (shards_for[c] >= by_class[c].size()) continue;
      const double avg =
          static_cast<double>(by_class[c].size()) / static_cast<double>(shards_for[c]);
      if (avg > best_avg) {
        best_avg = avg;
        best = c;
      }
    }
    if (best < 0) {
      throw PartitionError("quantity_shard_partition: N*s exceeds dataset size");
    }
    ++shards_for[best];
    ++assigned;
  }

  // Build shards per class: seed-shuffled within-label order, contiguous
  // cuts, remainder enlarging the tail shards.
  Rng rng(combine_seeds(seed, 0x7368617264ULL));
  std::vector<std::vector<size_t>> shards;
  shards.reserve(total_shards);
  for (int c : observed) {
    std::vector<size_t> idxs = by_class[c];
    rng.shuffle(idxs);
    const size_t k = shards_for[c];
    const size_t base = idxs.size() / k;
    const size_t rem = idxs.size() % k;
    size_t pos = 0;
    for (size_t j = 0; j < k; ++j) {
      size_t len = base + (j + rem >= k ? 1 : 0);
      shards.emplace_back(idxs.begin() + pos, idxs.begin() + pos + len);
      pos += len;
    }
  }

  std::vector<size_t> shard_order(shards.size());
  std::iota(shard_order.begin(), shard_order.end(), 0);
  rng.shuffle(shard_order);

  Partition part;
  part.assignments.assign(num_clients, {});
  for (int i = 0; i < num_clients; ++i) {
    for (int j = 0; j < shards_per_client; ++j) {
      const auto& shard = shards[shard_order[i * shards_per_client + j]];
      part.assignments[i].insert(part.assignments[i].end(), shard.begin(), shard.end());
    }
  }
  finalize_counts(part, labels, num_classes);
  return part;
}

PartitionStats partition_stats(const Partition& partition) {
  PartitionStats stats;
  stats.count_matrix = partition.count_matrix;
  for (int i = 0; i < partition.num_clients(); ++i) {
    stats.samples_per_client.push_back(partition.assignments[i].size());
    int empty = 0, distinct = 0;
    for (int64_t n : partition.count_matrix[i]) {
      if (n == 0) {
        ++empty;
      } else {
        ++distinct;
      }
    }
    stats.empty_classes_per_client.push_back(empty);
    stats.distinct_labels_per_client.push_back(distinct);
  }
  return stats;
}

std::string partition_to_json(const Partition& partition) {
  nlohmann::json j;
  j["clients"] = partition.assignments;
  j["counts"] = partition.count_matrix;
  return j.dump();
}

Partition partition_from_json(const std::string& text) {
  Partition part;
  nlohmann::json j = nlohmann::json::parse(text);
  part.assignments = j.at("clients").get<std::vector<std::vector<size_t>>>();
  part.count_matrix = j.at("counts").get<std::vector<std::vector<int64_t>>>();
  return part;
}

}  // namespace feded
