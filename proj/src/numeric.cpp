#include "feded/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "feded/error.hpp"

namespace feded {

double logsumexp(std::span<const double> v) {
  if (v.empty()) {
    throw UsageError("logsumexp of an empty vector");
  }
  double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> softmax(std::span<const double> v) {
  if (v.empty()) {
    throw UsageError("softmax of an empty vector");
  }
  double m = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    s += out[i];
  }
  for (double& x : out) x /= s;
  return out;
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace feded
