#pragma once

#include <span>
#include <vector>

namespace ehrcheck::util {

// Linear-interpolation percentile (the "linear" / type-7 convention):
// rank = p/100 * (n-1) over the sorted values. p in [0, 100].
// Empty input returns 0.
double percentile(std::vector<double> values, double p);

double mean(std::span<const double> values);
// Population standard deviation (divides by n).
double stddev(std::span<const double> values);

}  // namespace ehrcheck::util
