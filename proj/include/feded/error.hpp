#pragma once

#include <stdexcept>
#include <string>

namespace feded {

// Error families. The CLI maps them to exit codes:
// config=2, ingestion=3, training=4, io=5, anything else=1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IngestionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contract violations between modules (bad shapes, misuse of an API).
struct ShapeError : std::logic_error {
  using std::logic_error::logic_error;
};

struct UsageError : std::logic_error {
  using std::logic_error::logic_error;
};

// Partition construction failures (infeasible client/shard counts, retries exhausted).
struct PartitionError : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace feded
