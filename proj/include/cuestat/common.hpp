#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cuestat {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.14159265358979323846264338328;

// Pairwise (cascade) summation.  Truncation-error growth is O(log n) instead
// of O(n) for a running sum, which keeps long series and big double loops
// well inside the 1e-9 relative budget used by the cross-checks.
double pairwise_sum(std::span<const double> xs);

// Pairwise summation of term(lo), ..., term(hi - 1) without materializing
// the terms; recursion bottoms out on short runs.
template <class Term>
double indexed_pairwise_sum(std::int64_t lo, std::int64_t hi, Term&& term) {
  if (hi - lo <= 32) {
    double s = 0.0;
    for (std::int64_t k = lo; k < hi; ++k) s += term(k);
    return s;
  }
  const std::int64_t mid = lo + (hi - lo) / 2;
  return indexed_pairwise_sum(lo, mid, term) + indexed_pairwise_sum(mid, hi, term);
}

// Accumulator that buffers terms and pairwise-sums them on demand.
class PairwiseAccumulator {
 public:
  void add(double x) { terms_.push_back(x); }
  double total() const { return pairwise_sum(terms_); }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<double> terms_;
};

// A point estimate with its standard error and, when theory provides one,
// the exact reference value.  (The error field avoids the name "stderr",
// which <cstdio> claims as a macro.)
struct Estimate {
  std::string name;
  double value = 0.0;
  double std_err = 0.0;
  std::optional<double> reference;

  // |value - reference| <= band * std_err.  True when no reference exists.
  bool within(double band) const {
    if (!reference) return true;
    return std::abs(value - *reference) <= band * std_err;
  }
};

}  // namespace cuestat
