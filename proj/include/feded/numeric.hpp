#pragma once

#include <span>
#include <vector>

namespace feded {

// Shift-invariant log(sum(exp(v))). Throws UsageError on an empty span.
double logsumexp(std::span<const double> v);

// Stable softmax; entries in (0,1), sums to 1 within 1e-12.
std::vector<double> softmax(std::span<const double> v);

bool all_finite(std::span<const double> v);

}  // namespace feded
