#include "cuestat/limit_laws.hpp"

#include <cmath>
#include <stdexcept>

#include "cuestat/common.hpp"
#include "cuestat/rng.hpp"

namespace cuestat {

std::vector<double> sample_limit_law(const TestFunction& f, std::int64_t truncation,
                                     std::int64_t count, std::uint64_t seed) {
  if (truncation < 1) throw std::invalid_argument("sample_limit_law: truncation must be >= 1");
  if (count < 1) throw std::invalid_argument("sample_limit_law: count must be >= 1");
  std::vector<double> weights(static_cast<std::size_t>(truncation));
  for (std::int64_t k = 1; k <= truncation; ++k)
    weights[static_cast<std::size_t>(k - 1)] = 2.0 * f.coeff(k) * static_cast<double>(k);

  std::vector<double> draws(static_cast<std::size_t>(count));
  std::vector<double> terms(weights.size());
  for (std::int64_t i = 0; i < count; ++i) {
    RandomStream stream(seed, kLimitStreamBase + static_cast<std::uint64_t>(i));
    for (std::size_t k = 0; k < weights.size(); ++k)
      terms[k] = weights[k] * (stream.exponential() - 1.0);
    draws[static_cast<std::size_t>(i)] = pairwise_sum(terms);
  }
  return draws;
}

double limit_law_cumulant(const TestFunction& f, std::int64_t truncation, int order) {
  if (truncation < 1) throw std::invalid_argument("limit_law_cumulant: truncation must be >= 1");
  if (order < 1) throw std::invalid_argument("limit_law_cumulant: order must be >= 1");
  if (order == 1) return 0.0;
  double factorial = 1.0;
  for (int i = 2; i < order; ++i) factorial *= i;
  return factorial * indexed_pairwise_sum(1, truncation + 1, [&](std::int64_t k) {
           return std::pow(2.0 * f.coeff(k) * static_cast<double>(k), order);
         });
}

double exp_sum_mgf(std::span<const double> as, double t) {
  if (as.empty()) throw std::invalid_argument("exp_sum_mgf: empty coefficient list");
  const double sigma2 = indexed_pairwise_sum(
      0, static_cast<std::int64_t>(as.size()), [&](std::int64_t k) { return as[k] * as[k]; });
  if (sigma2 <= 0.0) throw std::domain_error("exp_sum_mgf: sigma = 0");
  const double sigma = std::sqrt(sigma2);

  // log E exp(tX) = sum_k [ -x_k - log(1 - x_k) ], x_k = t a_k / sigma.
  const double log_mgf =
      indexed_pairwise_sum(0, static_cast<std::int64_t>(as.size()), [&](std::int64_t k) {
        const double x = t * as[k] / sigma;
        if (x >= 1.0)
          throw std::domain_error("exp_sum_mgf: t a_k >= sigma, outside the MGF domain");
        return -x - std::log1p(-x);
      });
  return std::exp(log_mgf);
}

}  // namespace cuestat
