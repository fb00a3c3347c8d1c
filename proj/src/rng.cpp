#include "feded/rng.hpp"

#include <cmath>

#include "feded/error.hpp"

namespace feded {

double Rng::normal() {
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw UsageError("gamma shape must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape+1 and scale back.
    double u = uniform();
    while (u == 0.0) u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

size_t Rng::index(size_t n) {
  if (n == 0) {
    throw UsageError("Rng::index called with n = 0");
  }
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return static_cast<size_t>(r % n);
}

}  // namespace feded
