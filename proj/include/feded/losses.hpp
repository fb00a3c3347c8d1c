#pragma once

#include <span>
#include <vector>

#include "feded/matrix.hpp"
#include "feded/nn.hpp"

namespace feded {

// Empirical label distribution of one client's training split.
struct ClassPrior {
  std::vector<double> p;          // frequencies, sums to 1
  std::vector<int64_t> counts;
  std::vector<int> empty_set;     // ascending class ids with zero samples
  std::vector<char> is_empty;     // membership mask, size C

  int num_classes() const { return static_cast<int>(p.size()); }
  int num_observed() const { return num_classes() - static_cast<int>(empty_set.size()); }
};

ClassPrior class_priors(std::span<const int> labels, int num_classes);
ClassPrior uniform_prior(int num_classes);

// Scalar loss (mean over the minibatch) plus its gradient w.r.t. each logit.
struct LossResult {
  double value = 0.0;
  Matrix dlogits;  // [B x C]
};

// Plain mean softmax cross-entropy.
LossResult loss_ce(const Matrix& logits, std::span<const int> labels);

// Cross-entropy with logits shifted by log class priors; the partition
// function runs over observed classes only (empty classes carry zero weight).
LossResult loss_cal(const Matrix& logits, std::span<const int> labels, const ClassPrior& prior);

// KL(teacher || student) between softmaxes restricted to the empty classes.
// Zero (with zero gradient) when |O| <= 1. Gradients never flow to the teacher.
LossResult loss_dis(const Matrix& logits_local, const Matrix& logits_global,
                    std::span<const int> empty_set);

// Prior-weighted penalty on the log of the batch-mean exponential of each
// observed class's non-label logits. Classes whose indicator set is empty in
// this batch are skipped.
LossResult loss_logit(const Matrix& logits, std::span<const int> labels, const ClassPrior& prior);

// Combined objective: loss_cal + lambda * loss_dis + loss_logit.
LossResult loss_feded(const Matrix& logits_local, const Matrix& logits_global,
                      std::span<const int> labels, const ClassPrior& prior, double lambda);

// (mu/2)*||params - global||^2 over all parameters, gradient mu*(params - global).
struct ProxResult {
  double value = 0.0;
  Grads dparams;
};

ProxResult prox_term(const Model& params, const Model& params_global, double mu);

}  // namespace feded
