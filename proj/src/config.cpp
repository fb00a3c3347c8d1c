#include "feded/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "feded/error.hpp"

namespace feded {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + value +
                      "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  // dataset
  if (key == "dataset.kind") {
    if (value == "synthetic") {
      cfg.dataset.kind = DatasetConfig::Kind::Synthetic;
    } else if (value == "mnist") {
      cfg.dataset.kind = DatasetConfig::Kind::Mnist;
    } else {
      throw ConfigError("config key 'dataset.kind': expected synthetic|mnist, got '" + value +
                        "'");
    }
  } else if (key == "dataset.classes") {
    cfg.dataset.classes = static_cast<int>(parse_int(key, value));
  } else if (key == "dataset.dim") {
    cfg.dataset.dim = static_cast<int>(parse_int(key, value));
  } else if (key == "dataset.per_class") {
    cfg.dataset.per_class = static_cast<int>(parse_int(key, value));
  } else if (key == "dataset.sigma") {
    cfg.dataset.sigma = parse_double(key, value);
  } else if (key == "dataset.separation") {
    cfg.dataset.separation = parse_double(key, value);
  } else if (key == "dataset.seed") {
    cfg.dataset.seed = parse_u64(key, value);
  } else if (key == "dataset.train_images") {
    cfg.dataset.train_images = value;
  } else if (key == "dataset.train_labels") {
    cfg.dataset.train_labels = value;
  } else if (key == "dataset.test_images") {
    cfg.dataset.test_images = value;
  } else if (key == "dataset.test_labels") {
    cfg.dataset.test_labels = value;
  } else if (key == "dataset.subset_fraction") {
    cfg.dataset.subset_fraction = parse_double(key, value);
    // partition
  } else if (key == "partition.kind") {
    if (value == "dirichlet") {
      cfg.partition.kind = PartitionConfig::Kind::Dirichlet;
    } else if (value == "quantity") {
      cfg.partition.kind = PartitionConfig::Kind::Quantity;
    } else {
      throw ConfigError("config key 'partition.kind': expected dirichlet|quantity, got '" +
                        value + "'");
    }
  } else if (key == "partition.beta") {
    cfg.partition.beta = parse_double(key, value);
  } else if (key == "partition.shards_per_client") {
    cfg.partition.shards_per_client = static_cast<int>(parse_int(key, value));
  } else if (key == "partition.seed") {
    cfg.partition.seed = parse_u64(key, value);
  } else if (key == "partition.seed_follows_run") {
    cfg.partition.seed_follows_run = parse_bool(key, value);
    // training
  } else if (key == "training.method") {
    cfg.training.method = method_from_name(value);
  } else if (key == "training.rounds") {
    cfg.training.rounds = static_cast<int>(parse_int(key, value));
  } else if (key == "training.clients") {
    cfg.training.num_clients = static_cast<int>(parse_int(key, value));
  } else if (key == "training.participation") {
    cfg.training.participation_rate = parse_double(key, value);
  } else if (key == "training.local_epochs") {
    cfg.training.local_epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "training.batch_size") {
    cfg.training.batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "training.learning_rate") {
    cfg.training.learning_rate = parse_double(key, value);
  } else if (key == "training.momentum") {
    cfg.training.momentum = parse_double(key, value);
  } else if (key == "training.weight_decay") {
    cfg.training.weight_decay = parse_double(key, value);
  } else if (key == "training.lambda") {
    cfg.training.lambda = parse_double(key, value);
  } else if (key == "training.mu") {
    cfg.training.mu = parse_double(key, value);
  } else if (key == "training.hidden") {
    std::vector<int> widths;
    for (const std::string& item : split_list(value)) {
      widths.push_back(static_cast<int>(parse_int(key, item)));
    }
    cfg.training.hidden = widths;
  } else if (key == "training.strict_paper_weights") {
    cfg.training.strict_paper_weights = parse_bool(key, value);
  } else if (key == "training.parallel_clients") {
    cfg.training.parallel_clients = parse_bool(key, value);
    // report
  } else if (key == "report.dir") {
    cfg.report.dir = value;
  } else if (key == "report.format") {
    if (value == "csv") {
      cfg.report.csv = true;
      cfg.report.json = false;
    } else if (value == "json") {
      cfg.report.csv = false;
      cfg.report.json = true;
    } else if (value == "both") {
      cfg.report.csv = true;
      cfg.report.json = true;
    } else {
      throw ConfigError("config key 'report.format': expected csv|json|both, got '" + value +
                        "'");
    }
  } else if (key == "report.diagnostics") {
    cfg.report.diagnostics = parse_bool(key, value);
    // run
  } else if (key == "run.seeds") {
    std::vector<uint64_t> seeds;
    for (const std::string& item : split_list(value)) {
      seeds.push_back(parse_u64(key, item));
    }
    if (seeds.empty()) throw ConfigError("config key 'run.seeds': empty seed list");
    cfg.seeds = seeds;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  training.validate();
  if (dataset.kind == DatasetConfig::Kind::Synthetic) {
    if (dataset.classes < 2) throw ConfigError("dataset.classes must be >= 2");
    if (dataset.dim < 2) throw ConfigError("dataset.dim must be >= 2");
    if (dataset.per_class < 5) throw ConfigError("dataset.per_class must be >= 5");
    if (dataset.sigma <= 0.0) throw ConfigError("dataset.sigma must be > 0");
  } else {
    if (dataset.train_images.empty() || dataset.train_labels.empty() ||
        dataset.test_images.empty() || dataset.test_labels.empty()) {
      throw ConfigError("dataset.kind=mnist requires train/test image and label paths");
    }
    if (dataset.subset_fraction <= 0.0 || dataset.subset_fraction > 1.0) {
      throw ConfigError("dataset.subset_fraction must be in (0, 1]");
    }
  }
  if (partition.kind == PartitionConfig::Kind::Dirichlet && partition.beta <= 0.0) {
    throw ConfigError("partition.beta must be > 0");
  }
  if (partition.kind == PartitionConfig::Kind::Quantity && partition.shards_per_client < 1) {
    throw ConfigError("partition.shards_per_client must be >= 1");
  }
  if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
}

ExperimentConfig parse_config_text(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": key '" + key +
                        "' outside any [section]");
    }
    apply_key(cfg, section + "." + key, value);
  }
  for (const auto& [key, value] : overrides) {
    apply_key(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::string resolved_config_json(const ExperimentConfig& config) {
  nlohmann::json j;
  const DatasetConfig& d = config.dataset;
  if (d.kind == DatasetConfig::Kind::Synthetic) {
    j["dataset"] = {{"kind", "synthetic"},   {"classes", d.classes},
                    {"dim", d.dim},          {"per_class", d.per_class},
                    {"sigma", d.sigma},      {"separation", d.separation},
                    {"seed", d.seed}};
  } else {
    j["dataset"] = {{"kind", "mnist"},
                    {"train_images", d.train_images},
                    {"train_labels", d.train_labels},
                    {"test_images", d.test_images},
                    {"test_labels", d.test_labels},
                    {"subset_fraction", d.subset_fraction}};
  }
  const PartitionConfig& p = config.partition;
  if (p.kind == PartitionConfig::Kind::Dirichlet) {
    j["partition"] = {{"kind", "dirichlet"}, {"beta", p.beta}, {"seed", p.seed},
                      {"seed_follows_run", p.seed_follows_run}};
  } else {
    j["partition"] = {{"kind", "quantity"},
                      {"shards_per_client", p.shards_per_client},
                      {"seed", p.seed},
                      {"seed_follows_run", p.seed_follows_run}};
  }
  const FedConfig& t = config.training;
  j["training"] = {{"method", method_name(t.method)},
                   {"rounds", t.rounds},
                   {"clients", t.num_clients},
                   {"participation", t.participation_rate},
                   {"local_epochs", t.local_epochs},
                   {"batch_size", t.batch_size},
                   {"learning_rate", t.learning_rate},
                   {"momentum", t.momentum},
                   {"weight_decay", t.weight_decay},
                   {"lambda", t.lambda},
                   {"mu", t.mu},
                   {"hidden", t.hidden},
                   {"strict_paper_weights", t.strict_paper_weights},
                   {"parallel_clients", t.parallel_clients}};
  j["report"] = {{"dir", config.report.dir},
                 {"csv", config.report.csv},
                 {"json", config.report.json},
                 {"diagnostics", config.report.diagnostics}};
  j["run"] = {{"seeds", config.seeds}};
  return j.dump(2);
}

}  // namespace feded
