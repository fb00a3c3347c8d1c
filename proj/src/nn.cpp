#include "feded/nn.hpp"

#include <cmath>
#include <string>

#include "feded/error.hpp"
#include "feded/rng.hpp"

namespace feded {

Model init_model(const std::vector<int>& layer_widths, uint64_t seed) {
  if (layer_widths.size() < 2) {
    throw ConfigError("init_model needs at least [input, output] widths");
  }
  for (int w : layer_widths) {
    if (w <= 0) throw ConfigError("layer widths must be positive");
  }
  Rng rng(combine_seeds(seed, 0x6d6f64656cULL));
  Model model;
  model.layers.resize(layer_widths.size() - 1);
  for (size_t k = 0; k + 1 < layer_widths.size(); ++k) {
    int in = layer_widths[k];
    int out = layer_widths[k + 1];
    Layer& layer = model.layers[k];
    layer.weights = Matrix(out, in);
    layer.bias.assign(out, 0.0);
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : layer.weights.data) {
      w = rng.uniform(-bound, bound);
    }
  }
  return model;
}

static void check_input(const Model& model, const Matrix& features) {
  if (features.rows < 1 || features.cols != model.input_width()) {
    throw ShapeError("forward: features are " + std::to_string(features.rows) + "x" +
                     std::to_string(features.cols) + ", model expects input width " +
                     std::to_string(model.input_width()));
  }
}

static Matrix forward_impl(const Model& model, const Matrix& features, ForwardCache* cache) {
  check_input(model, features);
  if (cache) {
    cache->inputs.clear();
    cache->inputs.reserve(model.layers.size());
  }
  Matrix act = features;
  const size_t L = model.layers.size();
  for (size_t k = 0; k < L; ++k) {
    const Layer& layer = model.layers[k];
    if (cache) cache->inputs.push_back(act);
    const int out = layer.weights.rows;
    const int in = layer.weights.cols;
    Matrix next(act.rows, out);
    for (int b = 0; b < act.rows; ++b) {
      const double* x = act.row(b);
      double* y = next.row(b);
      for (int j = 0; j < out; ++j) {
        const double* w = layer.weights.row(j);
        double s = layer.bias[j];
        for (int i = 0; i < in; ++i) s += w[i] * x[i];
        y[j] = s;
      }
    }
    if (k + 1 < L) {
      for (double& v : next.data) v = v > 0.0 ? v : 0.0;  // ReLU on hidden layers
    }
    act = std::move(next);
  }
  return act;
}

Matrix forward(const Model& model, const Matrix& features) {
  return forward_impl(model, features, nullptr);
}

Matrix forward(const Model& model, const Matrix& features, ForwardCache& cache) {
  return forward_impl(model, features, &cache);
}

Grads zero_grads(const Model& model) {
  Grads g;
  g.dweights.reserve(model.layers.size());
  g.dbias.reserve(model.layers.size());
  for (const Layer& layer : model.layers) {
    g.dweights.emplace_back(layer.weights.rows, layer.weights.cols);
    g.dbias.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

Grads backward(const Model& model, const ForwardCache& cache, const Matrix& dlogits) {
  const size_t L = model.layers.size();
  if (cache.inputs.size() != L) {
    throw UsageError("backward: cache missing or stale; run forward with a cache first");
  }
  if (dlogits.rows != cache.inputs[0].rows || dlogits.cols != model.num_classes()) {
    throw ShapeError("backward: dlogits shape does not match forward output");
  }

  Grads grads = zero_grads(model);
  Matrix delta = dlogits;  // gradient w.r.t. layer k's pre-activation output
  for (size_t k = L; k-- > 0;) {
    const Layer& layer = model.layers[k];
    const Matrix& input = cache.inputs[k];
    const int out = layer.weights.rows;
    const int in = layer.weights.cols;
    Matrix& dW = grads.dweights[k];
    std::vector<double>& db = grads.dbias[k];

    for (int b = 0; b < delta.rows; ++b) {
      const double* d = delta.row(b);
      const double* x = input.row(b);
      for (int j = 0; j < out; ++j) {
        const double dj = d[j];
        if (dj == 0.0) continue;
        double* wrow = dW.row(j);
        for (int i = 0; i < in; ++i) wrow[i] += dj * x[i];
        db[j] += dj;
      }
    }

    if (k == 0) break;
    Matrix prev(delta.rows, in);
    for (int b = 0; b < delta.rows; ++b) {
      const double* d = delta.row(b);
      double* p = prev.row(b);
      for (int j = 0; j < out; ++j) {
        const double dj = d[j];
        if (dj == 0.0) continue;
        const double* wrow = layer.weights.row(j);
        for (int i = 0; i < in; ++i) p[i] += dj * wrow[i];
      }
      // ReLU gate: the cached input to layer k is the post-ReLU activation,
      // zero exactly where the pre-activation was clamped.
      const double* x = input.row(b);
      for (int i = 0; i < in; ++i) {
        if (x[i] <= 0.0) p[i] = 0.0;
      }
    }
    delta = std::move(prev);
  }
  return grads;
}

OptimizerState make_optimizer(const Model& model, double learning_rate, double momentum,
                              double weight_decay) {
  if (learning_rate < 0.0 || momentum < 0.0 || momentum >= 1.0 || weight_decay < 0.0) {
    throw ConfigError("optimizer: need lr >= 0, momentum in [0,1), weight_decay >= 0");
  }
  OptimizerState s;
  s.learning_rate = learning_rate;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  for (const Layer& layer : model.layers) {
    s.wbuf.emplace_back(layer.weights.rows, layer.weights.cols);
    s.bbuf.emplace_back(layer.bias.size(), 0.0);
  }
  return s;
}

void sgd_step(Model& model, const Grads& grads, OptimizerState& state) {
  if (grads.dweights.size() != model.layers.size() || state.wbuf.size() != model.layers.size()) {
    throw ShapeError("sgd_step: grads/state do not match the model");
  }
  const double lr = state.learning_rate;
  const double mom = state.momentum;
  const double wd = state.weight_decay;
  for (size_t k = 0; k < model.layers.size(); ++k) {
    Layer& layer = model.layers[k];
    const Matrix& dW = grads.dweights[k];
    if (!dW.same_shape(layer.weights)) {
      throw ShapeError("sgd_step: gradient shape mismatch at layer " + std::to_string(k));
    }
    Matrix& bw = state.wbuf[k];
    for (size_t i = 0; i < layer.weights.data.size(); ++i) {
      double g = dW.data[i] + wd * layer.weights.data[i];
      bw.data[i] = mom * bw.data[i] + g;
      layer.weights.data[i] -= lr * bw.data[i];
    }
    const std::vector<double>& db = grads.dbias[k];
    std::vector<double>& bb = state.bbuf[k];
    for (size_t i = 0; i < layer.bias.size(); ++i) {
      double g = db[i] + wd * layer.bias[i];
      bb[i] = mom * bb[i] + g;
      layer.bias[i] -= lr * bb[i];
    }
  }
}

size_t param_count(const Model& model) {
  size_t n = 0;
  for (const Layer& layer : model.layers) {
    n += layer.weights.size() + layer.bias.size();
  }
  return n;
}

std::vector<double> flatten(const Model& model) {
  std::vector<double> flat;
  flat.reserve(param_count(model));
  for (const Layer& layer : model.layers) {
    flat.insert(flat.end(), layer.weights.data.begin(), layer.weights.data.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void unflatten(Model& model, std::span<const double> flat) {
  if (flat.size() != param_count(model)) {
    throw ShapeError("unflatten: length does not match model parameter count");
  }
  size_t pos = 0;
  for (Layer& layer : model.layers) {
    std::copy(flat.begin() + pos, flat.begin() + pos + layer.weights.size(),
              layer.weights.data.begin());
    pos += layer.weights.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + layer.bias.size(), layer.bias.begin());
    pos += layer.bias.size();
  }
}

}  // namespace feded
