#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "feded/error.hpp"
#include "feded/partition.hpp"
#include "feded/rng.hpp"

using namespace feded;

namespace {

std::vector<int> balanced_labels(int num_classes, int per_class) {
  std::vector<int> labels;
  for (int c = 0; c < num_classes; ++c) {
    labels.insert(labels.end(), per_class, c);
  }
  return labels;
}

std::vector<int> random_labels(Rng& rng, int n, int num_classes) {
  std::vector<int> labels(n);
  for (int& y : labels) y = static_cast<int>(rng.index(num_classes));
  return labels;
}

// Independent verification of the partition invariants against the labels.
void check_partition(const Partition& part, const std::vector<int>& labels, int num_classes) {
  std::vector<size_t> all;
  for (int i = 0; i < part.num_clients(); ++i) {
    REQUIRE(!part.assignments[i].empty());
    all.insert(all.end(), part.assignments[i].begin(), part.assignments[i].end());

    // recount the row of the count matrix
    std::vector<int64_t> row(num_classes, 0);
    for (size_t idx : part.assignments[i]) ++row[labels[idx]];
    REQUIRE(row == part.count_matrix[i]);
    int64_t row_sum = std::accumulate(row.begin(), row.end(), int64_t{0});
    REQUIRE(static_cast<size_t>(row_sum) == part.assignments[i].size());
  }
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == labels.size());
  for (size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == i);  // disjoint + exhaustive
}

}  // namespace

TEST_CASE("dirichlet partition invariants hold on random draws") {
  Rng rng(31337);
  for (int it = 0; it < 40; ++it) {
    const int C = 2 + static_cast<int>(rng.index(8));
    const int N = 2 + static_cast<int>(rng.index(9));
    const int M = 200 + static_cast<int>(rng.index(800));
    const double beta = std::exp(rng.uniform(std::log(0.05), std::log(10.0)));
    std::vector<int> labels = random_labels(rng, M, C);
    Partition part = dirichlet_partition(labels, C, N, beta, rng.next_u64());
    check_partition(part, labels, C);
  }
}

TEST_CASE("dirichlet partition is deterministic and seed-sensitive") {
  std::vector<int> labels = balanced_labels(5, 100);
  Partition a = dirichlet_partition(labels, 5, 4, 0.3, 99);
  Partition b = dirichlet_partition(labels, 5, 4, 0.3, 99);
  CHECK(a.assignments == b.assignments);
  Partition c = dirichlet_partition(labels, 5, 4, 0.3, 100);
  CHECK(a.assignments != c.assignments);
}

TEST_CASE("huge beta concentrates near uniform proportions") {
  std::vector<int> labels = balanced_labels(10, 500);
  Partition part = dirichlet_partition(labels, 10, 10, 1e6, 7);
  for (int i = 0; i < 10; ++i) {
    const double total = static_cast<double>(part.assignments[i].size());
    for (int c = 0; c < 10; ++c) {
      const double frac = static_cast<double>(part.count_matrix[i][c]) / total;
      CHECK(std::abs(frac - 0.1) / 0.1 <= 0.05);
    }
  }
}

TEST_CASE("small beta yields many empty classes per client") {
  std::vector<int> labels = balanced_labels(10, 200);
  int seeds_with_skew = 0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Partition part = dirichlet_partition(labels, 10, 10, 0.05, seed);
    PartitionStats stats = partition_stats(part);
    int median_candidates = 0;
    for (int e : stats.empty_classes_per_client) {
      if (e >= 3) ++median_candidates;
    }
    if (median_candidates >= 5) ++seeds_with_skew;
  }
  CHECK(seeds_with_skew >= 4);  // statistical, acceptance re-checks over 20 seeds
}

TEST_CASE("dirichlet preserves the global class histogram") {
  Rng rng(4242);
  std::vector<int> labels = random_labels(rng, 1200, 6);
  std::vector<int64_t> hist(6, 0);
  for (int y : labels) ++hist[y];
  Partition part = dirichlet_partition(labels, 6, 7, 0.2, 11);
  std::vector<int64_t> agg(6, 0);
  for (const auto& row : part.count_matrix) {
    for (int c = 0; c < 6; ++c) agg[c] += row[c];
  }
  CHECK(agg == hist);
}

TEST_CASE("dirichlet fails cleanly when clients cannot all be filled") {
  std::vector<int> labels{0, 1, 2};
  CHECK_THROWS_AS(dirichlet_partition(labels, 3, 5, 0.5, 1), PartitionError);
}

TEST_CASE("dirichlet rejects non-positive beta") {
  std::vector<int> labels = balanced_labels(3, 10);
  CHECK_THROWS_AS(dirichlet_partition(labels, 3, 2, 0.0, 1), PartitionError);
}

TEST_CASE("quantity shards bound distinct labels by s") {
  std::vector<int> labels = balanced_labels(10, 500);
  Partition part = quantity_shard_partition(labels, 10, 10, 2, 13);
  check_partition(part, labels, 10);
  PartitionStats stats = partition_stats(part);
  for (int d : stats.distinct_labels_per_client) CHECK(d <= 2);
}

TEST_CASE("quantity shard invariants hold on random draws") {
  Rng rng(515151);
  for (int it = 0; it < 40; ++it) {
    const int C = 2 + static_cast<int>(rng.index(8));
    const int N = 1 + static_cast<int>(rng.index(10));
    const int s = 1 + static_cast<int>(rng.index(4));
    const int M = std::max(N * s * 3, 50) + static_cast<int>(rng.index(200));
    std::vector<int> labels = random_labels(rng, M, C);
    if (static_cast<size_t>(N) * s < 1) continue;
    // ensure enough shards for the observed classes
    std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() > static_cast<size_t>(N) * s) continue;
    Partition part = quantity_shard_partition(labels, C, N, s, rng.next_u64());
    check_partition(part, labels, C);
    PartitionStats stats = partition_stats(part);
    for (int d : stats.distinct_labels_per_client) CHECK(d <= s);
  }
}

TEST_CASE("single client with enough shards holds everything") {
  std::vector<int> labels = balanced_labels(4, 25);
  Partition part = quantity_shard_partition(labels, 4, 1, 8, 3);
  CHECK(part.assignments[0].size() == labels.size());
  PartitionStats stats = partition_stats(part);
  CHECK(stats.empty_classes_per_client[0] == 0);
}

TEST_CASE("quantity shard error paths") {
  std::vector<int> labels = balanced_labels(2, 3);  // 6 samples
  CHECK_THROWS_AS(quantity_shard_partition(labels, 2, 4, 2, 1), PartitionError);  // N*s > M
  std::vector<int> many_classes = balanced_labels(8, 4);
  // 8 observed classes but only 1*4 shards
  CHECK_THROWS_AS(quantity_shard_partition(many_classes, 8, 1, 4, 1), PartitionError);
}

TEST_CASE("quantity shard is deterministic per seed") {
  std::vector<int> labels = balanced_labels(5, 37);  // remainder exercises tail shards
  Partition a = quantity_shard_partition(labels, 5, 3, 2, 77);
  Partition b = quantity_shard_partition(labels, 5, 3, 2, 77);
  CHECK(a.assignments == b.assignments);
  Partition c = quantity_shard_partition(labels, 5, 3, 2, 78);
  CHECK(a.assignments != c.assignments);
}

TEST_CASE("partition_stats recount matches an independent pass") {
  std::vector<int> labels = balanced_labels(6, 40);
  Partition part = dirichlet_partition(labels, 6, 4, 0.5, 5);
  PartitionStats stats = partition_stats(part);
  for (int i = 0; i < part.num_clients(); ++i) {
    CHECK(stats.samples_per_client[i] == part.assignments[i].size());
    int empty = 0;
    std::set<int> seen;
    for (size_t idx : part.assignments[i]) seen.insert(labels[idx]);
    for (int c = 0; c < 6; ++c) {
      if (!seen.count(c)) ++empty;
    }
    CHECK(stats.empty_classes_per_client[i] == empty);
    CHECK(stats.distinct_labels_per_client[i] == static_cast<int>(seen.size()));
  }
  CHECK(stats.count_matrix == part.count_matrix);
}

TEST_CASE("single client stats equal the global histogram") {
  std::vector<int> labels = balanced_labels(3, 11);
  Partition part = quantity_shard_partition(labels, 3, 1, 3, 2);
  PartitionStats stats = partition_stats(part);
  CHECK(stats.empty_classes_per_client[0] == 0);
  CHECK(stats.count_matrix[0] == std::vector<int64_t>{11, 11, 11});
}

TEST_CASE("partition JSON export round-trips") {
  std::vector<int> labels = balanced_labels(4, 20);
  Partition part = dirichlet_partition(labels, 4, 3, 1.0, 9);
  Partition back = partition_from_json(partition_to_json(part));
  CHECK(back.assignments == part.assignments);
  CHECK(back.count_matrix == part.count_matrix);
}
