#pragma once

#include <string>
#include <vector>

#include "feded/config.hpp"

namespace feded {

// Materialized experiment inputs shared across the runs of one command.
struct ExperimentData {
  Dataset train;
  Dataset test;
};

ExperimentData load_dataset(const DatasetConfig& config);

Partition make_partition(const PartitionConfig& config, const Dataset& train, int num_clients,
                         uint64_t run_seed);

// Each command writes per-seed reports, a resolved-config echo, and a summary
// JSON into the report directory. FEDED_REPORT_DIR overrides the directory.
// Returns the written summary path.
std::string cmd_run(ExperimentConfig config);
std::string cmd_ablate(ExperimentConfig config);
std::string cmd_lambda_sweep(ExperimentConfig config, std::vector<double> grid = {});

// Default grid for the lambda sweep.
std::vector<double> default_lambda_grid();

}  // namespace feded
