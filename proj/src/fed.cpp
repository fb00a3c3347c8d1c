#include "feded/fed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "feded/error.hpp"
#include "feded/rng.hpp"

namespace feded {

std::string method_name(Method m) {
  switch (m) {
    case Method::FedAvg: return "fedavg";
    case Method::FedProx: return "fedprox";
    case Method::Calibrated: return "calibrated";
    case Method::FedED: return "feded";
    case Method::FedEDNoDis: return "feded_no_dis";
    case Method::FedEDNoLogit: return "feded_no_logit";
  }
  throw UsageError("method_name: unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "fedavg") return Method::FedAvg;
  if (name == "fedprox") return Method::FedProx;
  if (name == "calibrated") return Method::Calibrated;
  if (name == "feded") return Method::FedED;
  if (name == "feded_no_dis") return Method::FedEDNoDis;
  if (name == "feded_no_logit") return Method::FedEDNoLogit;
  throw ConfigError("unknown method '" + name +
                    "' (expected fedavg|fedprox|calibrated|feded|feded_no_dis|feded_no_logit)");
}

void FedConfig::validate() const {
  if (rounds < 1) throw ConfigError("training.rounds must be >= 1");
  if (num_clients < 1) throw ConfigError("training.clients must be >= 1");
  if (!(participation_rate > 0.0) || participation_rate > 1.0) {
    throw ConfigError("training.participation must be in (0, 1]");
  }
  if (local_epochs < 1) throw ConfigError("training.local_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
  if (learning_rate < 0.0) throw ConfigError("training.learning_rate must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("training.momentum must be in [0, 1)");
  if (weight_decay < 0.0) throw ConfigError("training.weight_decay must be >= 0");
  if (lambda < 0.0) throw ConfigError("training.lambda must be >= 0");
  if (mu < 0.0) throw ConfigError("training.mu must be >= 0");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("training.hidden widths must be positive");
  }
}

int FedConfig::participants_per_round() const {
  int m = static_cast<int>(std::floor(participation_rate * num_clients));
  return std::max(m, 1);
}

std::vector<ClientState> build_clients(const Partition& partition,
                                       std::span<const int> train_labels, int num_classes) {
  std::vector<ClientState> clients;
  clients.reserve(partition.assignments.size());
  for (int i = 0; i < partition.num_clients(); ++i) {
    ClientState c;
    c.id = i;
    c.train_indices = partition.assignments[i];
    std::vector<int> local_labels;
    local_labels.reserve(c.train_indices.size());
    for (size_t idx : c.train_indices) local_labels.push_back(train_labels[idx]);
    c.prior = class_priors(local_labels, num_classes);
    clients.push_back(std::move(c));
  }
  return clients;
}

std::vector<int> select_clients(int num_clients, double participation_rate, int round,
                                uint64_t master_seed) {
  const int m = std::max(static_cast<int>(std::floor(participation_rate * num_clients)), 1);
  if (m > num_clients) throw UsageError("select_clients: m exceeds N");
  std::vector<int> ids(num_clients);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(combine_seeds(master_seed, static_cast<uint64_t>(round), 0x73656c656374ULL));
  // Partial Fisher-Yates: the first m entries are a uniform subset.
  for (int i = 0; i < m; ++i) {
    const size_t j = i + rng.index(static_cast<size_t>(num_clients - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {

LossResult method_loss(Method method, const Model& global, const Batch& batch,
                       const Matrix& logits, const ClientState& client, const FedConfig& config) {
  switch (method) {
    case Method::FedAvg:
    case Method::FedProx:
      // FedProx adds its proximal term in parameter space, outside this path.
      return loss_ce(logits, batch.labels);
    case Method::Calibrated:
      return loss_cal(logits, batch.labels, client.prior);
    case Method::FedED: {
      const Matrix teacher = forward(global, batch.features);
      return loss_feded(logits, teacher, batch.labels, client.prior, config.lambda);
    }
    case Method::FedEDNoDis: {
      LossResult cal = loss_cal(logits, batch.labels, client.prior);
      LossResult sup = loss_logit(logits, batch.labels, client.prior);
      cal.value += sup.value;
      for (size_t i = 0; i < cal.dlogits.data.size(); ++i) {
        cal.dlogits.data[i] += sup.dlogits.data[i];
      }
      return cal;
    }
    case Method::FedEDNoLogit: {
      const Matrix teacher = forward(global, batch.features);
      LossResult cal = loss_cal(logits, batch.labels, client.prior);
      LossResult dis = loss_dis(logits, teacher, client.prior.empty_set);
      cal.value += config.lambda * dis.value;
      for (size_t i = 0; i < cal.dlogits.data.size(); ++i) {
        cal.dlogits.data[i] += config.lambda * dis.dlogits.data[i];
      }
      return cal;
    }
  }
  throw UsageError("method_loss: unknown method");
}

}  // namespace

Model local_update(const Model& global_params, const ClientState& client, const Dataset& train,
                   const FedConfig& config, int round) {
  Model local = global_params;
  OptimizerState opt = make_optimizer(local, config.learning_rate, config.momentum,
                                      config.weight_decay);
  const uint64_t stream_seed =
      combine_seeds(config.master_seed, static_cast<uint64_t>(client.id),
                    static_cast<uint64_t>(round));
  for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
    BatchStream stream(train, client.train_indices, config.batch_size,
                       combine_seeds(stream_seed, static_cast<uint64_t>(epoch)));
    Batch batch;
    int batch_idx = 0;
    while (stream.next(batch)) {
      ForwardCache cache;
      const Matrix logits = forward(local, batch.features, cache);
      LossResult loss =
          method_loss(config.method, global_params, batch, logits, client, config);

      double total_value = loss.value;
      Grads grads = backward(local, cache, loss.dlogits);
      if (config.method == Method::FedProx) {
        ProxResult prox = prox_term(local, global_params, config.mu);
        total_value += prox.value;
        for (size_t k = 0; k < grads.dweights.size(); ++k) {
          for (size_t i = 0; i < grads.dweights[k].data.size(); ++i) {
            grads.dweights[k].data[i] += prox.dparams.dweights[k].data[i];
          }
          for (size_t i = 0; i < grads.dbias[k].size(); ++i) {
            grads.dbias[k][i] += prox.dparams.dbias[k][i];
          }
        }
      }
      if (!std::isfinite(total_value)) {
        throw TrainingError("training diverged: non-finite loss at client " +
                            std::to_string(client.id) + ", round " + std::to_string(round) +
                            ", epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_idx));
      }
      sgd_step(local, grads, opt);
      ++batch_idx;
    }
  }
  return local;
}

Model aggregate(const Model& global_params, const std::vector<LocalResult>& locals,
                size_t denominator) {
  if (locals.empty()) throw UsageError("aggregate: no local results");
  if (denominator == 0) throw UsageError("aggregate: zero denominator");
  Model next = global_params;
  for (const LocalResult& lr : locals) {
    if (lr.model.layers.size() != next.layers.size()) {
      throw ShapeError("aggregate: local model layer count mismatch");
    }
    const double w = static_cast<double>(lr.sample_count) / static_cast<double>(denominator);
    for (size_t k = 0; k < next.layers.size(); ++k) {
      Layer& dst = next.layers[k];
      const Layer& loc = lr.model.layers[k];
      const Layer& glob = global_params.layers[k];
      if (!loc.weights.same_shape(dst.weights) || loc.bias.size() != dst.bias.size()) {
        throw ShapeError("aggregate: parameter shape mismatch at layer " + std::to_string(k));
      }
      for (size_t i = 0; i < dst.weights.data.size(); ++i) {
        dst.weights.data[i] += w * (loc.weights.data[i] - glob.weights.data[i]);
      }
      for (size_t i = 0; i < dst.bias.size(); ++i) {
        dst.bias[i] += w * (loc.bias[i] - glob.bias[i]);
      }
    }
  }
  return next;
}

std::vector<RoundReport> run_experiment(const FedConfig& config, const Dataset& train,
                                        const Dataset& test, const Partition& partition) {
  config.validate();
  if (partition.num_clients() != config.num_clients) {
    throw ConfigError("run_experiment: partition has " +
                      std::to_string(partition.num_clients()) + " clients, config expects " +
                      std::to_string(config.num_clients));
  }
  const std::vector<ClientState> clients =
      build_clients(partition, train.labels, train.num_classes);
  size_t total_samples = 0;
  for (const ClientState& c : clients) total_samples += c.sample_count();

  std::vector<int> widths;
  widths.push_back(train.dim());
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(train.num_classes);
  Model global = init_model(widths, config.master_seed);

  std::vector<RoundReport> reports;
  reports.reserve(config.rounds);
  for (int t = 1; t <= config.rounds; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> selected =
        select_clients(config.num_clients, config.participation_rate, t, config.master_seed);

    std::vector<LocalResult> locals(selected.size());
    auto train_one = [&](size_t slot) {
      const ClientState& client = clients[selected[slot]];
      locals[slot].model = local_update(global, client, train, config, t);
      locals[slot].sample_count = client.sample_count();
    };
    if (config.parallel_clients && selected.size() > 1) {
      std::vector<std::thread> workers;
      workers.reserve(selected.size());
      for (size_t s = 0; s < selected.size(); ++s) workers.emplace_back(train_one, s);
      for (std::thread& w : workers) w.join();
    } else {
      for (size_t s = 0; s < selected.size(); ++s) train_one(s);
    }

    size_t denominator = total_samples;
    if (!config.strict_paper_weights) {
      denominator = 0;
      for (const LocalResult& lr : locals) denominator += lr.sample_count;
    }
    global = aggregate(global, locals, denominator);

    RoundReport report;
    report.round = t;
    Evaluation ev = evaluate(global, test);
    report.global_accuracy = ev.global_accuracy;
    report.classwise = std::move(ev.classwise);
    if (config.client_diagnostics) {
      for (size_t s = 0; s < selected.size(); ++s) {
        report.client_classwise[selected[s]] = evaluate(locals[s].model, test).classwise;
      }
    }
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<AblationRow> run_ablation_suite(const FedConfig& base, const Dataset& train,
                                            const Dataset& test, const Partition& partition) {
  const Method rows[] = {Method::Calibrated, Method::FedEDNoDis, Method::FedEDNoLogit,
                         Method::FedED};
  std::vector<AblationRow> out;
  for (Method m : rows) {
    FedConfig config = base;
    config.method = m;
    out.push_back({m, run_experiment(config, train, test, partition)});
  }
  return out;
}

}  // namespace feded
