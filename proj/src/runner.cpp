#include "feded/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "feded/error.hpp"
#include "feded/rng.hpp"

namespace feded {

namespace {

namespace fs = std::filesystem;

void apply_report_dir_env(ExperimentConfig& config) {
  if (const char* dir = std::getenv("FEDED_REPORT_DIR")) {
    if (*dir) config.report.dir = dir;
  }
}

fs::path prepare_report_dir(const ExperimentConfig& config) {
  fs::path dir(config.report.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create report directory " + dir.string());
  std::ofstream resolved(dir / "resolved_config.json", std::ios::binary);
  if (!resolved) throw IoError("cannot write resolved_config.json in " + dir.string());
  resolved << resolved_config_json(config) << "\n";
  return dir;
}

void write_formats(const std::vector<RoundReport>& reports, const fs::path& dir,
                   const std::string& stem, const ReportConfig& rc) {
  if (rc.csv) write_report(reports, (dir / (stem + ".csv")).string(), ReportFormat::Csv);
  if (rc.json) write_report(reports, (dir / (stem + ".json")).string(), ReportFormat::Json);
}

void write_summary(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write summary " + path.string());
  out << j.dump(2) << "\n";
}

std::string fmt_lambda(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

nlohmann::json summary_block(const std::vector<double>& finals,
                             const std::vector<uint64_t>& seeds) {
  RunSummary s = summarize_runs(finals);
  nlohmann::json per_seed = nlohmann::json::object();
  for (size_t i = 0; i < seeds.size(); ++i) {
    per_seed[std::to_string(seeds[i])] = finals[i];
  }
  return {{"per_seed", per_seed}, {"mean", s.mean}, {"std", s.stddev}};
}

// One full run for one master seed; reports written by the caller.
std::vector<RoundReport> run_one(const ExperimentConfig& config, const ExperimentData& data,
                                 uint64_t seed) {
  FedConfig train_cfg = config.training;
  train_cfg.master_seed = seed;
  train_cfg.client_diagnostics = config.report.diagnostics;
  Partition part = make_partition(config.partition, data.train, train_cfg.num_clients, seed);
  return run_experiment(train_cfg, data.train, data.test, part);
}

}  // namespace

ExperimentData load_dataset(const DatasetConfig& config) {
  ExperimentData data;
  if (config.kind == DatasetConfig::Kind::Synthetic) {
    auto [train, test] = gen_synthetic(config.classes, config.dim, config.per_class, config.sigma,
                                       config.seed, config.separation);
    data.train = std::move(train);
    data.test = std::move(test);
  } else {
    data.train = load_mnist_idx(config.train_images, config.train_labels);
    data.train.split = "train";
    data.test = load_mnist_idx(config.test_images, config.test_labels);
    data.test.split = "test";
    if (config.subset_fraction < 1.0) {
      data.train = stratified_subset(data.train, config.subset_fraction, 0xdadaULL);
      data.test = stratified_subset(data.test, config.subset_fraction, 0xdadbULL);
    }
  }
  return data;
}

Partition make_partition(const PartitionConfig& config, const Dataset& train, int num_clients,
                         uint64_t run_seed) {
  const uint64_t seed = config.seed_follows_run ? run_seed : config.seed;
  if (config.kind == PartitionConfig::Kind::Dirichlet) {
    return dirichlet_partition(train.labels, train.num_classes, num_clients, config.beta, seed);
  }
  return quantity_shard_partition(train.labels, train.num_classes, num_clients,
                                  config.shards_per_client, seed);
}

std::string cmd_run(ExperimentConfig config) {
  apply_report_dir_env(config);
  config.validate();
  const fs::path dir = prepare_report_dir(config);
  const ExperimentData data = load_dataset(config.dataset);

  std::vector<double> finals;
  for (uint64_t seed : config.seeds) {
    std::vector<RoundReport> reports = run_one(config, data, seed);
    finals.push_back(reports.back().global_accuracy);
    write_formats(reports, dir,
                  "run_" + method_name(config.training.method) + "_seed" + std::to_string(seed),
                  config.report);
  }

  nlohmann::json j;
  j["command"] = "run";
  j["method"] = method_name(config.training.method);
  j["final_accuracy"] = summary_block(finals, config.seeds);
  const fs::path path = dir / "summary.json";
  write_summary(j, path);
  return path.string();
}

std::string cmd_ablate(ExperimentConfig config) {
  apply_report_dir_env(config);
  config.validate();
  const fs::path dir = prepare_report_dir(config);
  const ExperimentData data = load_dataset(config.dataset);

  const Method rows[] = {Method::Calibrated, Method::FedEDNoDis, Method::FedEDNoLogit,
                         Method::FedED};
  std::vector<std::vector<double>> finals(4);
  for (uint64_t seed : config.seeds) {
    // All four rows share the same partition and initial model for this seed.
    FedConfig base = config.training;
    base.master_seed = seed;
    base.client_diagnostics = config.report.diagnostics;
    Partition part = make_partition(config.partition, data.train, base.num_clients, seed);
    std::vector<AblationRow> suite = run_ablation_suite(base, data.train, data.test, part);
    for (size_t r = 0; r < suite.size(); ++r) {
      finals[r].push_back(suite[r].reports.back().global_accuracy);
      write_formats(suite[r].reports, dir,
                    "ablate_" + method_name(suite[r].method) + "_seed" + std::to_string(seed),
                    config.report);
    }
  }

  nlohmann::json j;
  j["command"] = "ablate";
  nlohmann::json jrows = nlohmann::json::array();
  const double base_mean = summarize_runs(finals[0]).mean;
  for (size_t r = 0; r < 4; ++r) {
    nlohmann::json row;
    row["method"] = method_name(rows[r]);
    row["final_accuracy"] = summary_block(finals[r], config.seeds);
    row["delta_over_first_row"] = summarize_runs(finals[r]).mean - base_mean;
    jrows.push_back(row);
  }
  j["rows"] = jrows;
  const fs::path path = dir / "ablation_summary.json";
  write_summary(j, path);
  return path.string();
}

std::vector<double> default_lambda_grid() { return {0.05, 0.1, 0.25, 0.5, 1.0}; }

std::string cmd_lambda_sweep(ExperimentConfig config, std::vector<double> grid) {
  apply_report_dir_env(config);
  config.validate();
  if (grid.empty()) grid = default_lambda_grid();
  for (double v : grid) {
    if (v < 0.0) throw ConfigError("lambda grid values must be non-negative");
  }
  const fs::path dir = prepare_report_dir(config);
  const ExperimentData data = load_dataset(config.dataset);

  nlohmann::json jpoints = nlohmann::json::array();
  double max_mean = 0.0, min_mean = 1.0;
  for (double lambda : grid) {
    ExperimentConfig point = config;
    point.training.lambda = lambda;
    point.training.method = Method::FedED;
    std::vector<double> finals;
    for (uint64_t seed : point.seeds) {
      std::vector<RoundReport> reports = run_one(point, data, seed);
      finals.push_back(reports.back().global_accuracy);
      write_formats(reports, dir,
                    "lambda_" + fmt_lambda(lambda) + "_seed" + std::to_string(seed),
                    config.report);
    }
    const double mean = summarize_runs(finals).mean;
    max_mean = std::max(max_mean, mean);
    min_mean = std::min(min_mean, mean);
    nlohmann::json point_json;
    point_json["lambda"] = lambda;
    point_json["final_accuracy"] = summary_block(finals, point.seeds);
    jpoints.push_back(point_json);
  }

  nlohmann::json j;
  j["command"] = "lambda_sweep";
  j["points"] = jpoints;
  j["mean_accuracy_spread"] = max_mean - min_mean;
  const fs::path path = dir / "lambda_sweep_summary.json";
  write_summary(j, path);
  return path.string();
}

}  // namespace feded
