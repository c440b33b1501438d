#include "cuestat/common.hpp"

namespace cuestat {

namespace {

double pairwise_range(const double* xs, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += xs[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_range(xs, half) + pairwise_range(xs + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> xs) {
  return pairwise_range(xs.data(), xs.size());
}

}  // namespace cuestat
