#include "feded/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "feded/error.hpp"

namespace feded {

Evaluation evaluate(const Model& model, const Dataset& test) {
  if (test.size() < 1) throw UsageError("evaluate: empty test set");
  const int C = model.num_classes();
  std::vector<int64_t> correct(C, 0), total(C, 0);

  // Evaluate in chunks to bound the logits buffer.
  constexpr int kChunk = 256;
  for (int start = 0; start < test.size(); start += kChunk) {
    const int n = std::min(kChunk, test.size() - start);
    Matrix batch(n, test.dim());
    for (int b = 0; b < n; ++b) {
      const double* src = test.features.row(start + b);
      std::copy(src, src + test.dim(), batch.row(b));
    }
    Matrix logits = forward(model, batch);
    for (int b = 0; b < n; ++b) {
      const double* f = logits.row(b);
      int pred = 0;
      for (int c = 1; c < C; ++c) {
        if (f[c] > f[pred]) pred = c;
      }
      const int y = test.labels[start + b];
      ++total[y];
      if (pred == y) ++correct[y];
    }
  }

  Evaluation ev;
  ev.classwise.resize(C);
  int64_t correct_all = 0;
  for (int c = 0; c < C; ++c) {
    if (total[c] == 0) {
      throw UsageError("evaluate: class " + std::to_string(c) +
                       " absent from the test set; class-wise accuracy undefined");
    }
    ev.classwise[c] = static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    correct_all += correct[c];
  }
  ev.global_accuracy = static_cast<double>(correct_all) / static_cast<double>(test.size());
  return ev;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

nlohmann::json report_to_json(const RoundReport& r) {
  nlohmann::json j;
  j["round"] = r.round;
  j["global_acc"] = r.global_accuracy;
  j["classwise"] = r.classwise;
  if (!r.client_classwise.empty()) {
    nlohmann::json diag = nlohmann::json::object();
    for (const auto& [client, acc] : r.client_classwise) {
      diag[std::to_string(client)] = acc;
    }
    j["client_classwise"] = diag;
  }
  return j;
}

}  // namespace

void write_report(const std::vector<RoundReport>& reports, const std::string& path,
                  ReportFormat format) {
  if (reports.empty()) throw UsageError("write_report: empty report list");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_report: cannot open " + path);

  if (format == ReportFormat::Csv) {
    const size_t C = reports.front().classwise.size();
    out << "round,global_acc";
    for (size_t c = 0; c < C; ++c) out << ",classwise_" << c;
    out << "\n";
    for (const RoundReport& r : reports) {
      out << r.round << "," << fmt_double(r.global_accuracy);
      for (double v : r.classwise) out << "," << fmt_double(v);
      out << "\n";
    }
  } else {
    nlohmann::json j = nlohmann::json::array();
    for (const RoundReport& r : reports) j.push_back(report_to_json(r));
    out << j.dump(2) << "\n";
  }
  if (!out) throw IoError("write_report: write failed for " + path);
}

std::vector<RoundReport> read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_report_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  std::vector<RoundReport> reports;
  for (const auto& item : j) {
    RoundReport r;
    r.round = item.at("round").get<int>();
    r.global_accuracy = item.at("global_acc").get<double>();
    r.classwise = item.at("classwise").get<std::vector<double>>();
    if (item.contains("client_classwise")) {
      for (const auto& [key, val] : item.at("client_classwise").items()) {
        r.client_classwise[std::stoi(key)] = val.get<std::vector<double>>();
      }
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

RunSummary summarize_runs(std::span<const double> final_accuracies) {
  if (final_accuracies.empty()) throw UsageError("summarize_runs: no runs");
  RunSummary s;
  // Shifted by the first value so identical runs give exactly zero spread.
  const double shift = final_accuracies.front();
  double acc = 0.0;
  for (double v : final_accuracies) acc += v - shift;
  s.mean = shift + acc / static_cast<double>(final_accuracies.size());
  if (final_accuracies.size() > 1) {
    double ss = 0.0;
    for (double v : final_accuracies) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(final_accuracies.size() - 1));
  }
  return s;
}

}  // namespace feded
