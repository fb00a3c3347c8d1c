#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "feded/data.hpp"
#include "feded/nn.hpp"

namespace feded {

struct Evaluation {
  double global_accuracy = 0.0;
  std::vector<double> classwise;  // per-class recall on the test set
};

// Argmax over raw logits, ties broken toward the lowest class index.
// Throws if some class is absent from the test set.
Evaluation evaluate(const Model& model, const Dataset& test);

struct RoundReport {
  int round = 0;
  double global_accuracy = 0.0;
  std::vector<double> classwise;
  // Post-LocalUpdate class-wise accuracy per participating client, filled
  // only when diagnostics are enabled.
  std::map<int, std::vector<double>> client_classwise;
  // Not serialized; reports must be byte-identical across reruns.
  double wall_time_s = 0.0;
};

enum class ReportFormat { Csv, Json };

// CSV schema: round,global_acc,classwise_0..classwise_{C-1}. JSON mirrors the
// same fields and adds per-client diagnostics when present.
void write_report(const std::vector<RoundReport>& reports, const std::string& path,
                  ReportFormat format);
std::vector<RoundReport> read_report_json(const std::string& path);

struct RunSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1); zero for a single run
};

RunSummary summarize_runs(std::span<const double> final_accuracies);

}  // namespace feded
