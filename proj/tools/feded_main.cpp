#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "feded/error.hpp"
#include "feded/runner.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> raw_overrides;  // section.key=value
  std::string seed_list, method, report_dir, hidden;
  double lambda = -1.0, beta = -1.0, participation = -1.0;
  int rounds = -1, clients = -1, local_epochs = -1, batch_size = -1;

  std::vector<std::pair<std::string, std::string>> overrides() const {
    std::vector<std::pair<std::string, std::string>> out;
    auto add = [&out](const std::string& key, const std::string& value) {
      out.emplace_back(key, value);
    };
    if (!seed_list.empty()) add("run.seeds", seed_list);
    if (!method.empty()) add("training.method", method);
    if (!report_dir.empty()) add("report.dir", report_dir);
    if (!hidden.empty()) add("training.hidden", hidden);
    if (lambda >= 0.0) add("training.lambda", std::to_string(lambda));
    if (beta >= 0.0) add("partition.beta", std::to_string(beta));
    if (participation >= 0.0) add("training.participation", std::to_string(participation));
    if (rounds >= 0) add("training.rounds", std::to_string(rounds));
    if (clients >= 0) add("training.clients", std::to_string(clients));
    if (local_epochs >= 0) add("training.local_epochs", std::to_string(local_epochs));
    if (batch_size >= 0) add("training.batch_size", std::to_string(batch_size));
    for (const std::string& kv : raw_overrides) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        throw feded::ConfigError("--set expects section.key=value, got '" + kv + "'");
      }
      add(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return out;
  }
};

void attach_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file")->required();
  cmd->add_option("--seed", flags.seed_list, "master seed list, e.g. 1,2,3");
  cmd->add_option("--method", flags.method, "training method override");
  cmd->add_option("--lambda", flags.lambda, "distillation weight override");
  cmd->add_option("--beta", flags.beta, "Dirichlet beta override");
  cmd->add_option("--rounds", flags.rounds, "communication rounds override");
  cmd->add_option("--clients", flags.clients, "client count override");
  cmd->add_option("--participation", flags.participation, "participation rate override");
  cmd->add_option("--local-epochs", flags.local_epochs, "local epochs override");
  cmd->add_option("--batch-size", flags.batch_size, "batch size override");
  cmd->add_option("--hidden", flags.hidden, "hidden widths override, e.g. 256,128");
  cmd->add_option("--report-dir", flags.report_dir, "report directory override");
  cmd->add_option("--set", flags.raw_overrides, "generic section.key=value override")
      ->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feded: heterogeneous federated learning simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags, ablate_flags, sweep_flags;
  CLI::App* run = app.add_subcommand("run", "single method, one run per seed");
  attach_common(run, run_flags);
  CLI::App* ablate = app.add_subcommand("ablate", "four-row loss ablation suite");
  attach_common(ablate, ablate_flags);
  CLI::App* sweep = app.add_subcommand("lambda-sweep", "accuracy across a lambda grid");
  attach_common(sweep, sweep_flags);
  std::string grid_arg;
  sweep->add_option("--grid", grid_arg, "lambda grid, e.g. 0.05,0.1,0.25,0.5,1");

  CLI11_PARSE(app, argc, argv);

  try {
    std::string summary;
    if (run->parsed()) {
      summary = feded::cmd_run(feded::parse_config(run_flags.config_path, run_flags.overrides()));
    } else if (ablate->parsed()) {
      summary = feded::cmd_ablate(
          feded::parse_config(ablate_flags.config_path, ablate_flags.overrides()));
    } else {
      std::vector<double> grid;
      if (!grid_arg.empty()) {
        std::stringstream ss(grid_arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (!item.empty()) grid.push_back(std::stod(item));
        }
      }
      summary = feded::cmd_lambda_sweep(
          feded::parse_config(sweep_flags.config_path, sweep_flags.overrides()), grid);
    }
    std::cout << "summary written to " << summary << "\n";
    return 0;
  } catch (const feded::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const feded::IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return 3;
  } catch (const feded::TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 4;
  } catch (const feded::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
