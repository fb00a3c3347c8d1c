#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "feded/fed.hpp"

namespace feded {

struct DatasetConfig {
  enum class Kind { Synthetic, Mnist };
  Kind kind = Kind::Synthetic;
  // synthetic
  int classes = 10;
  int dim = 32;
  int per_class = 200;
  double sigma = 1.0;
  double separation = 1.0;
  uint64_t seed = 7;
  // mnist
  std::string train_images, train_labels, test_images, test_labels;
  double subset_fraction = 1.0;  // stratified, applied to train and test
};

struct PartitionConfig {
  enum class Kind { Dirichlet, Quantity };
  Kind kind = Kind::Dirichlet;
  double beta = 0.05;
  int shards_per_client = 2;
  uint64_t seed = 11;
  // When true the partition seed follows each run's master seed, making every
  // seed a fully independent replicate.
  bool seed_follows_run = false;
};

struct ReportConfig {
  std::string dir = "reports";
  bool csv = true;
  bool json = false;
  bool diagnostics = false;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  PartitionConfig partition;
  FedConfig training;
  ReportConfig report;
  std::vector<uint64_t> seeds = {1};

  void validate() const;
};

// Flat sectioned key=value format; '#' or ';' starts a comment. Overrides are
// "section.key=value" pairs applied after the file, flags first.
ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides);
ExperimentConfig parse_config_text(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Canonical JSON echo of every effective value, written next to the reports.
std::string resolved_config_json(const ExperimentConfig& config);

}  // namespace feded
