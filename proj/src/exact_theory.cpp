#include "cuestat/exact_theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "cuestat/common.hpp"

namespace cuestat {

namespace {

// Coefficient accessor with an optional hard cutoff (fhat(k) = 0 beyond it),
// used to evaluate the formulas for truncated statistics f_K.
struct CoeffView {
  const TestFunction& f;
  std::int64_t cutoff;  // inclusive; negative means none

  double operator()(std::int64_t k) const {
    if (cutoff >= 0 && std::abs(k) > cutoff) return 0.0;
    return f.coeff(k);
  }
  bool finite() const { return cutoff >= 0 || f.finite_support(); }
  std::int64_t end() const {
    if (!finite()) return -1;
    return cutoff >= 0 ? std::min<std::int64_t>(cutoff, f.support_end()) : f.support_end();
  }
  double squared_tail_bound(std::int64_t t) const {
    return finite() ? 0.0 : f.squared_tail_bound(t);
  }
};

std::int64_t resolve_k_tail(std::int64_t k_tail, std::int64_t n) {
  if (k_tail == 0) return 32 * n;
  if (k_tail < 2 * n) throw std::invalid_argument("k_tail must be at least 2 N");
  return k_tail;
}

VarianceBreakdown variance_terms(const CoeffView& g, std::int64_t n, std::int64_t lower,
                                 std::int64_t k_tail) {
  VarianceBreakdown out;
  out.k_tail = k_tail;
  out.lower_cutoff = lower;
  const double n2n = static_cast<double>(n) * static_cast<double>(n - 1);

  // Stop index for tail sums: exact end for finite coefficients, k_tail
  // plus a remainder bound otherwise.
  const bool finite = g.finite();
  const std::int64_t top = finite ? g.end() : k_tail;

  out.term1 = 4.0 * indexed_pairwise_sum(lower, n, [&](std::int64_t s) {
                const double c = g(s);
                return static_cast<double>(s) * static_cast<double>(s) * c * c;
              });

  if (top >= n)
    out.term2 = 4.0 * n2n * indexed_pairwise_sum(n, top + 1, [&](std::int64_t s) {
                  const double c = g(s);
                  return c * c;
                });

  // term3 over ordered pairs (s, t) = (t + d, t), d = 1..N-1, doubled for
  // the two orderings; max(s, t) = t + d >= N forces t >= N - d.
  {
    std::vector<double> by_d;
    by_d.reserve(static_cast<std::size_t>(n));
    for (std::int64_t d = 1; d <= n - 1; ++d) {
      const std::int64_t t_lo = std::max<std::int64_t>({1, n - d, lower});
      const std::int64_t t_hi = top - d;  // keeps s = t + d within the sum range
      if (t_hi < t_lo) continue;
      const double inner =
          indexed_pairwise_sum(t_lo, t_hi + 1, [&](std::int64_t t) { return g(t) * g(t + d); });
      by_d.push_back(2.0 * static_cast<double>(n - d) * inner);
    }
    out.term3 = 4.0 * pairwise_sum(by_d);
  }

  {
    std::vector<double> by_s;
    by_s.reserve(static_cast<std::size_t>(n));
    for (std::int64_t s = lower; s <= n - 1; ++s) {
      const std::int64_t t_lo = std::max<std::int64_t>(lower, n + 1 - s);
      if (t_lo > n - 1) continue;
      const double inner = indexed_pairwise_sum(t_lo, n, [&](std::int64_t t) {
        return static_cast<double>(s + t - n) * g(t);
      });
      by_s.push_back(g(s) * inner);
    }
    out.term4 = 4.0 * pairwise_sum(by_s);
  }

  if (!finite) {
    const double tail_sq = g.squared_tail_bound(k_tail);
    const double tail_sq_shifted = g.squared_tail_bound(k_tail - n + 1);
    out.tail_bound = 4.0 * n2n * tail_sq +
                     8.0 * static_cast<double>(n) * static_cast<double>(n - 1) * tail_sq_shifted;
  }

  out.total = out.term1 + out.term2 - out.term3 - out.term4;
  return out;
}

// Power iteration for the top eigenvalue of a symmetric PSD operator given
// through its matvec; returns sqrt(lambda_max), i.e. the operator norm of
// the underlying (possibly rectangular) matrix.
template <class Matvec>
double power_iteration_norm(std::size_t dim, Matvec&& apply_gram) {
  constexpr double kRelTol = 1e-10;
  constexpr int kMaxIter = 200000;

  std::vector<double> v(dim), w(dim);
  for (std::size_t k = 0; k < dim; ++k)
    v[k] = 1.0 + 0.5 * static_cast<double>(k) / static_cast<double>(dim);
  double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  for (auto& x : v) x /= norm;

  double lambda = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    apply_gram(v, w);
    const double next = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    const double wn = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (wn == 0.0) return 0.0;
    for (std::size_t k = 0; k < dim; ++k) v[k] = w[k] / wn;
    if (it > 4 && std::abs(next - lambda) <= kRelTol * std::abs(next)) return std::sqrt(next);
    lambda = next;
  }
  throw std::runtime_error("power iteration failed to converge");
}

}  // namespace

VarianceBreakdown variance_exact(const TestFunction& f, std::int64_t n,
                                 const VarianceOptions& opts) {
  if (n < 1) throw std::invalid_argument("variance_exact: N must be >= 1");
  const std::int64_t k_tail = resolve_k_tail(opts.k_tail, n);
  const CoeffView g{f, opts.coeff_cutoff.value_or(-1)};
  return variance_terms(g, n, 1, k_tail);
}

VarianceBreakdown variance_tail_exact(const TestFunction& f, std::int64_t n, int schedule_m,
                                      const VarianceOptions& opts) {
  if (n < 2) throw std::invalid_argument("variance_tail_exact: N must be >= 2");
  if (schedule_m < 2) throw std::invalid_argument("variance_tail_exact: M must be >= 2");
  const std::int64_t k_tail = resolve_k_tail(opts.k_tail, n);
  const CoeffView g{f, opts.coeff_cutoff.value_or(-1)};
  return variance_terms(g, n, n / schedule_m + 1, k_tail);
}

Lemma21Sums lemma21_sums(const TestFunction& f, std::int64_t n, std::int64_t k_tail) {
  if (n < 1) throw std::invalid_argument("lemma21_sums: N must be >= 1");
  Lemma21Sums out;
  out.k_tail = resolve_k_tail(k_tail, n);
  const std::int64_t top =
      f.finite_support() ? std::max<std::int64_t>(f.support_end(), n) : out.k_tail;

  // Kahan prefix sums of |fhat| up to top + N; the window sums below become
  // prefix differences, so each sum costs O(top) instead of O(top * N).
  const auto pmax = static_cast<std::size_t>(top + n + 1);
  std::vector<double> prefix(pmax + 1, 0.0);
  {
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 1; k <= pmax; ++k) {
      const double y = std::abs(f.coeff(static_cast<std::int64_t>(k))) - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      prefix[k] = sum;
    }
  }
  const auto window = [&](std::int64_t lo, std::int64_t hi) {  // sum of |fhat| on [lo, hi]
    if (hi < lo) return 0.0;
    lo = std::max<std::int64_t>(lo, 1);
    hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(pmax));
    if (hi < lo) return 0.0;
    return prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo - 1)];
  };

  out.sum_i = indexed_pairwise_sum(1, n + 1, [&](std::int64_t s) {
    return static_cast<double>(s) * std::abs(f.coeff(s)) * window(n + 1 - s, n);
  });

  out.sum_ii = static_cast<double>(n + 1) *
               indexed_pairwise_sum(n + 1, 2 * n + 1, [&](std::int64_t s) {
                 return std::abs(f.coeff(s)) * window(s - n, n);
               });

  out.sum_iii = static_cast<double>(n) * indexed_pairwise_sum(n, top + 1, [&](std::int64_t t) {
                  return std::abs(f.coeff(t)) * window(std::max(n, t - n + 1), t + n - 1);
                });

  if (!f.finite_support())
    out.tail_bound = static_cast<double>(n) * (2.0 * static_cast<double>(n) - 1.0) *
                     f.squared_tail_bound(out.k_tail - n + 1);
  return out;
}

double a_matrix_norm(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("a_matrix_norm: N must be >= 1");
  const auto dim = static_cast<std::size_t>(n);
  std::vector<double> y(dim), py(dim + 1);
  // Gram matvec w = A^T A v with prefix sums: (A v)_s = (1/s) sum_{t > N-s} v_t
  // and (A^T y)_t = sum_{s >= N-t+1} y_s / s.
  const auto gram = [&](const std::vector<double>& v, std::vector<double>& w) {
    std::vector<double> pv(dim + 1, 0.0);
    for (std::size_t t = 0; t < dim; ++t) pv[t + 1] = pv[t] + v[t];
    for (std::size_t s = 1; s <= dim; ++s)
      y[s - 1] = (pv[dim] - pv[dim - s]) / static_cast<double>(s);
    py[0] = 0.0;
    for (std::size_t s = 1; s <= dim; ++s) py[s] = py[s - 1] + y[s - 1] / static_cast<double>(s);
    for (std::size_t t = 1; t <= dim; ++t) w[t - 1] = py[dim] - py[dim - t];
  };
  return power_iteration_norm(dim, gram);
}

ROperatorNorm r_operator_norm(std::int64_t n, std::int64_t j) {
  if (n < 1) throw std::invalid_argument("r_operator_norm: N must be >= 1");
  if (j < 1) throw std::invalid_argument("r_operator_norm: j must be >= 1");
  ROperatorNorm out;
  out.hs_norm = std::sqrt(static_cast<double>(n) *
                          indexed_pairwise_sum(j * n, (j + 1) * n, [](std::int64_t t) {
                            return 1.0 / (static_cast<double>(t) * static_cast<double>(t));
                          }));

  // Column indices span [jN-N+1, (j+1)N-1]; rows t in [jN, (j+1)N).  Both
  // matvecs are prefix-sum windows, O(N) per iteration.
  const std::int64_t col_lo = j * n - n + 1;
  const std::int64_t col_hi = (j + 1) * n - 1;
  const auto cols = static_cast<std::size_t>(col_hi - col_lo + 1);
  const auto rows = static_cast<std::size_t>(n);
  const std::int64_t row_lo = j * n;

  std::vector<double> y(rows), pyt(rows + 1);
  const auto gram = [&](const std::vector<double>& v, std::vector<double>& w) {
    std::vector<double> pv(cols + 1, 0.0);
    for (std::size_t c = 0; c < cols; ++c) pv[c + 1] = pv[c] + v[c];
    for (std::size_t r = 0; r < rows; ++r) {
      const std::int64_t t = row_lo + static_cast<std::int64_t>(r);
      // columns s in [t-N+1, t] -> offsets [t-N+1-col_lo, t-col_lo]
      const auto lo = static_cast<std::size_t>(t - n + 1 - col_lo);
      const auto hi = static_cast<std::size_t>(t - col_lo);
      y[r] = (pv[hi + 1] - pv[lo]) / static_cast<double>(t);
    }
    pyt[0] = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
      pyt[r + 1] = pyt[r] + y[r] / static_cast<double>(row_lo + static_cast<std::int64_t>(r));
    for (std::size_t c = 0; c < cols; ++c) {
      const std::int64_t s = col_lo + static_cast<std::int64_t>(c);
      // rows t with t >= s and t <= s+N-1, clamped to the block
      const std::int64_t t_lo = std::max<std::int64_t>(row_lo, s);
      const std::int64_t t_hi = std::min<std::int64_t>(row_lo + n - 1, s + n - 1);
      if (t_hi < t_lo) {
        w[c] = 0.0;
        continue;
      }
      const auto a = static_cast<std::size_t>(t_lo - row_lo);
      const auto b = static_cast<std::size_t>(t_hi - row_lo);
      w[c] = pyt[b + 1] - pyt[a];
    }
  };
  out.op_norm = power_iteration_norm(cols, gram);
  return out;
}

std::optional<double> joint_cumulant_exact(std::span<const std::int64_t> ks, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("joint_cumulant_exact: N must be >= 1");
  if (ks.empty()) throw std::invalid_argument("joint_cumulant_exact: empty index list");
  std::int64_t sum = 0, abs_sum = 0;
  for (const auto k : ks) {
    if (k == 0) throw std::invalid_argument("joint_cumulant_exact: zero index");
    sum += k;
    abs_sum += std::abs(k);
  }
  if (sum != 0) return 0.0;
  if (ks.size() == 2) return static_cast<double>(std::min<std::int64_t>(std::abs(ks[0]), n));
  if (abs_sum <= n) return 0.0;  // n > 2 here: size 1 cannot have sum 0
  return std::nullopt;
}

double moment_identity_rhs(std::span<const std::int64_t> ks, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("moment_identity_rhs: N must be >= 1");
  if (ks.empty()) throw std::invalid_argument("moment_identity_rhs: empty index list");
  std::int64_t sum = 0;
  std::map<std::int64_t, int> mult;
  for (const auto k : ks) {
    if (k <= 0) throw std::invalid_argument("moment_identity_rhs: indices must be positive");
    sum += k;
    ++mult[k];
  }
  if (2 * sum > n)
    throw std::domain_error("moment_identity_rhs: identity requires 2 sum k_i <= N");
  double value = 1.0;
  for (const auto& [k, m] : mult) {
    double factorial = 1.0;
    for (int i = 2; i <= m; ++i) factorial *= i;
    value *= std::pow(static_cast<double>(k), m) * factorial;
  }
  return value;
}

}  // namespace cuestat
