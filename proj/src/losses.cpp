#include "feded/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "feded/error.hpp"
#include "feded/numeric.hpp"

namespace feded {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_labels(const Matrix& logits, std::span<const int> labels) {
  if (logits.rows < 1) throw ShapeError("loss: empty logits");
  if (static_cast<size_t>(logits.rows) != labels.size()) {
    throw ShapeError("loss: batch size mismatch between logits and labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= logits.cols) {
      throw ShapeError("loss: label " + std::to_string(y) + " out of range for C = " +
                       std::to_string(logits.cols));
    }
  }
}

}  // namespace

ClassPrior class_priors(std::span<const int> labels, int num_classes) {
  if (labels.empty()) throw ConfigError("class_priors: empty label list");
  ClassPrior prior;
  prior.counts.assign(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ShapeError("class_priors: label " + std::to_string(y) + " out of range");
    }
    ++prior.counts[y];
  }
  prior.p.resize(num_classes);
  prior.is_empty.assign(num_classes, 0);
  const double total = static_cast<double>(labels.size());
  for (int c = 0; c < num_classes; ++c) {
    prior.p[c] = static_cast<double>(prior.counts[c]) / total;
    if (prior.counts[c] == 0) {
      prior.is_empty[c] = 1;
      prior.empty_set.push_back(c);
    }
  }
  return prior;
}

ClassPrior uniform_prior(int num_classes) {
  ClassPrior prior;
  prior.counts.assign(num_classes, 1);
  prior.p.assign(num_classes, 1.0 / num_classes);
  prior.is_empty.assign(num_classes, 0);
  return prior;
}

LossResult loss_ce(const Matrix& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  const int B = logits.rows;
  const int C = logits.cols;
  LossResult res;
  res.dlogits = Matrix(B, C);
  for (int b = 0; b < B; ++b) {
    std::span<const double> row(logits.row(b), static_cast<size_t>(C));
    std::vector<double> q = softmax(row);
    res.value += logsumexp(row) - row[labels[b]];
    for (int c = 0; c < C; ++c) {
      res.dlogits(b, c) = (q[c] - (c == labels[b] ? 1.0 : 0.0)) / B;
    }
  }
  res.value /= B;
  return res;
}

LossResult loss_cal(const Matrix& logits, std::span<const int> labels, const ClassPrior& prior) {
  check_labels(logits, labels);
  if (prior.num_classes() != logits.cols) {
    throw ShapeError("loss_cal: prior has wrong class count");
  }
  if (prior.num_observed() == 0) {
    throw UsageError("loss_cal: prior has no observed classes");
  }
  const int B = logits.rows;
  const int C = logits.cols;

  // Shifted logits log p(c) + f[c] over observed classes; empty classes sit
  // at -inf which is exactly their zero weight in the partition function.
  std::vector<double> shifted(C);
  LossResult res;
  res.dlogits = Matrix(B, C);
  for (int b = 0; b < B; ++b) {
    const int y = labels[b];
    if (prior.is_empty[y]) {
      throw TrainingError("loss_cal: batch label " + std::to_string(y) +
                          " lies in the client's empty set (partition/prior mismatch)");
    }
    const double* f = logits.row(b);
    double m = kNegInf;
    for (int c = 0; c < C; ++c) {
      shifted[c] = prior.is_empty[c] ? kNegInf : std::log(prior.p[c]) + f[c];
      m = std::max(m, shifted[c]);
    }
    double z = 0.0;
    for (int c = 0; c < C; ++c) {
      if (!prior.is_empty[c]) z += std::exp(shifted[c] - m);
    }
    const double lse = m + std::log(z);
    res.value += lse - shifted[y];
    for (int c = 0; c < C; ++c) {
      if (prior.is_empty[c]) continue;
      const double q = std::exp(shifted[c] - m) / z;
      res.dlogits(b, c) = (q - (c == y ? 1.0 : 0.0)) / B;
    }
  }
  res.value /= B;
  return res;
}

LossResult loss_dis(const Matrix& logits_local, const Matrix& logits_global,
                    std::span<const int> empty_set) {
  if (!logits_local.same_shape(logits_global)) {
    throw ShapeError("loss_dis: local and global logits differ in shape");
  }
  const int B = logits_local.rows;
  const int C = logits_local.cols;
  for (int o : empty_set) {
    if (o < 0 || o >= C) {
      throw ShapeError("loss_dis: empty-class index " + std::to_string(o) + " out of range");
    }
  }
  LossResult res;
  res.dlogits = Matrix(B, C);
  const size_t k = empty_set.size();
  if (k <= 1) return res;  // one-class softmax is identically 1; KL vanishes

  // Log-space softmaxes: log q = f - logsumexp(f). Keeps the KL finite for
  // any finite logits even when the restricted softmax underflows.
  std::vector<double> fl(k), fg(k);
  for (int b = 0; b < B; ++b) {
    for (size_t i = 0; i < k; ++i) {
      fl[i] = logits_local(b, empty_set[i]);
      fg[i] = logits_global(b, empty_set[i]);
    }
    const double lse_l = logsumexp(fl);
    const double lse_g = logsumexp(fg);
    double kl = 0.0;
    for (size_t i = 0; i < k; ++i) {
      const double log_q = fl[i] - lse_l;
      const double log_qg = fg[i] - lse_g;
      const double qg = std::exp(log_qg);
      kl += qg * (log_qg - log_q);
      res.dlogits(b, empty_set[i]) = (std::exp(log_q) - qg) / B;
    }
    res.value += kl;
  }
  res.value /= B;
  return res;
}

LossResult loss_logit(const Matrix& logits, std::span<const int> labels, const ClassPrior& prior) {
  check_labels(logits, labels);
  if (prior.num_classes() != logits.cols) {
    throw ShapeError("loss_logit: prior has wrong class count");
  }
  const int B = logits.rows;
  const int C = logits.cols;
  const double logB = std::log(static_cast<double>(B));
  LossResult res;
  res.dlogits = Matrix(B, C);
  for (int c = 0; c < C; ++c) {
    if (prior.is_empty[c]) continue;
    // Masked logsumexp over samples whose label differs from c.
    double m = kNegInf;
    int n_masked = 0;
    for (int b = 0; b < B; ++b) {
      if (labels[b] != c) {
        m = std::max(m, logits(b, c));
        ++n_masked;
      }
    }
    if (n_masked == 0) continue;  // batch held only class c; log 0 undefined, term skipped
    double z = 0.0;
    for (int b = 0; b < B; ++b) {
      if (labels[b] != c) z += std::exp(logits(b, c) - m);
    }
    res.value += prior.p[c] * (m + std::log(z) - logB);
    for (int b = 0; b < B; ++b) {
      if (labels[b] != c) {
        res.dlogits(b, c) = prior.p[c] * std::exp(logits(b, c) - m) / z;
      }
    }
  }
  return res;
}

LossResult loss_feded(const Matrix& logits_local, const Matrix& logits_global,
                      std::span<const int> labels, const ClassPrior& prior, double lambda) {
  if (lambda < 0.0) throw ConfigError("loss_feded: lambda must be non-negative");
  LossResult cal = loss_cal(logits_local, labels, prior);
  LossResult dis = loss_dis(logits_local, logits_global, prior.empty_set);
  LossResult sup = loss_logit(logits_local, labels, prior);
  LossResult res;
  res.value = cal.value + lambda * dis.value + sup.value;
  res.dlogits = std::move(cal.dlogits);
  for (size_t i = 0; i < res.dlogits.data.size(); ++i) {
    res.dlogits.data[i] += lambda * dis.dlogits.data[i] + sup.dlogits.data[i];
  }
  return res;
}

ProxResult prox_term(const Model& params, const Model& params_global, double mu) {
  if (params.layers.size() != params_global.layers.size()) {
    throw ShapeError("prox_term: models differ in layer count");
  }
  ProxResult res;
  res.dparams = zero_grads(params);
  for (size_t k = 0; k < params.layers.size(); ++k) {
    const Layer& a = params.layers[k];
    const Layer& g = params_global.layers[k];
    if (!a.weights.same_shape(g.weights) || a.bias.size() != g.bias.size()) {
      throw ShapeError("prox_term: parameter shapes differ at layer " + std::to_string(k));
    }
    for (size_t i = 0; i < a.weights.data.size(); ++i) {
      const double d = a.weights.data[i] - g.weights.data[i];
      res.value += d * d;
      res.dparams.dweights[k].data[i] = mu * d;
    }
    for (size_t i = 0; i < a.bias.size(); ++i) {
      const double d = a.bias[i] - g.bias[i];
      res.value += d * d;
      res.dparams.dbias[k][i] = mu * d;
    }
  }
  res.value *= 0.5 * mu;
  return res;
}

}  // namespace feded
