#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "feded/matrix.hpp"

namespace feded {

// Fully connected classifier: affine + ReLU on hidden layers, raw logits out.
struct Layer {
  Matrix weights;            // [out x in]
  std::vector<double> bias;  // [out]
};

struct Model {
  std::vector<Layer> layers;

  int input_width() const { return layers.front().weights.cols; }
  int num_classes() const { return layers.back().weights.rows; }
};

// Weights uniform in (-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero.
// Deterministic for a fixed seed. widths = [in, hidden..., num_classes].
Model init_model(const std::vector<int>& layer_widths, uint64_t seed);

// Layer inputs captured during forward, consumed by backward.
struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[k] = activation fed into layer k
};

// Returns logits [B x C]. The cache overload records activations for backward.
Matrix forward(const Model& model, const Matrix& features);
Matrix forward(const Model& model, const Matrix& features, ForwardCache& cache);

// Gradient arrays shaped exactly like the model parameters.
struct Grads {
  std::vector<Matrix> dweights;
  std::vector<std::vector<double>> dbias;
};

Grads zero_grads(const Model& model);

// Chain rule from dlogits back through the affine/ReLU stack. Whatever
// batch averaging the loss applied is already inside dlogits; backward only
// propagates.
Grads backward(const Model& model, const ForwardCache& cache, const Matrix& dlogits);

struct OptimizerState {
  double learning_rate = 0.01;
  double momentum = 0.0;
  double weight_decay = 0.0;
  std::vector<Matrix> wbuf;
  std::vector<std::vector<double>> bbuf;
};

OptimizerState make_optimizer(const Model& model, double learning_rate, double momentum,
                              double weight_decay);

// buffer <- momentum*buffer + grad + weight_decay*param; param <- param - lr*buffer.
void sgd_step(Model& model, const Grads& grads, OptimizerState& state);

// Flat parameter view, layer order, weights row-major then bias. Used by the
// proximal term, aggregation tests, and finite-difference checks.
size_t param_count(const Model& model);
std::vector<double> flatten(const Model& model);
void unflatten(Model& model, std::span<const double> flat);

}  // namespace feded
