#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cuestat/test_function.hpp"

namespace cuestat {

// The centered pair statistic converges (for beta = 2, slowly varying
// divergent V_N) to the exponential sum
//
//   L = 2 sum_{k>=1} fhat(k) k (phi_k - 1),   phi_k i.i.d. Exp(1),
//
// sampled here with the series truncated at k <= K.  Draw i of a run is a
// pure function of (seed, i), so batches are reproducible and thread-count
// independent.
std::vector<double> sample_limit_law(const TestFunction& f, std::int64_t truncation,
                                     std::int64_t count, std::uint64_t seed);

// Cumulants of the truncated limit law: kappa_1 = 0 and, for m >= 2,
// kappa_m = (m-1)! sum_{k<=K} (2 fhat(k) k)^m.
double limit_law_cumulant(const TestFunction& f, std::int64_t truncation, int order);

// Moment generating function of sum a_k (phi_k - 1) / sigma at argument t,
// sigma^2 = sum a_k^2:
//
//   E exp(t X) = prod_k exp(-t a_k / sigma) / (1 - t a_k / sigma),
//
// evaluated in log space; requires t a_k < sigma for every k.  Converges to
// exp(t^2/2) when sigma -> infinity with max |a_k| = o(sigma).
double exp_sum_mgf(std::span<const double> as, double t);

}  // namespace cuestat
