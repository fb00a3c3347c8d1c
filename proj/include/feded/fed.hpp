#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feded/data.hpp"
#include "feded/losses.hpp"
#include "feded/metrics.hpp"
#include "feded/nn.hpp"
#include "feded/partition.hpp"

namespace feded {

enum class Method {
  FedAvg,        // plain cross-entropy
  FedProx,       // cross-entropy + (mu/2)*||w - w_global||^2
  Calibrated,    // prior-calibrated cross-entropy only
  FedED,         // calibrated + lambda*distillation + logit suppression
  FedEDNoDis,    // ablation: calibrated + logit suppression
  FedEDNoLogit,  // ablation: calibrated + lambda*distillation
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct FedConfig {
  int rounds = 50;
  int num_clients = 10;
  double participation_rate = 1.0;  // R in (0, 1]
  int local_epochs = 5;
  int batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-5;
  Method method = Method::FedED;
  double lambda = 0.1;  // distillation weight
  double mu = 0.01;     // FedProx proximal coefficient
  uint64_t master_seed = 1;
  std::vector<int> hidden = {256, 128};
  // Aggregation denominator: participants' sample total by default, or the
  // full |D| over all clients (which shrinks the step under partial
  // participation).
  bool strict_paper_weights = false;
  bool parallel_clients = false;
  bool client_diagnostics = false;

  void validate() const;  // throws ConfigError naming the offending field
  int participants_per_round() const;  // m = max(floor(R*N), 1)
};

struct ClientState {
  int id = 0;
  std::vector<size_t> train_indices;
  ClassPrior prior;

  size_t sample_count() const { return train_indices.size(); }
};

std::vector<ClientState> build_clients(const Partition& partition,
                                       std::span<const int> train_labels, int num_classes);

// Uniform subset of size m without replacement, seeded by (master_seed, t).
// Returned ids are ascending.
std::vector<int> select_clients(int num_clients, double participation_rate, int round,
                                uint64_t master_seed);

// One client's local training pass: E epochs of seeded minibatch SGD from the
// round-start global parameters, under the configured method's objective.
Model local_update(const Model& global_params, const ClientState& client, const Dataset& train,
                   const FedConfig& config, int round);

struct LocalResult {
  Model model;
  size_t sample_count = 0;
};

// global + sum_i (count_i / denominator) * (local_i - global), in list order.
Model aggregate(const Model& global_params, const std::vector<LocalResult>& locals,
                size_t denominator);

std::vector<RoundReport> run_experiment(const FedConfig& config, const Dataset& train,
                                        const Dataset& test, const Partition& partition);

struct AblationRow {
  Method method;
  std::vector<RoundReport> reports;
};

// The four-row loss ablation (neither extra term / suppression only /
// distillation only / both) on one shared partition, seed, and initial model.
std::vector<AblationRow> run_ablation_suite(const FedConfig& base, const Dataset& train,
                                            const Dataset& test, const Partition& partition);

}  // namespace feded
