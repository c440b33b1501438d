#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cuestat/test_function.hpp"

namespace cuestat {

// Closed-form second-order theory for the pair statistic over the unitary
// ensemble, plus the operator-norm bounds used to control the off-diagonal
// variance terms.

// Exact variance of S_N(f), split into its four terms:
//
//   Var = 4 sum_{1<=s<=N-1} s^2 fhat(s)^2                          (term1)
//       + 4 (N^2-N) sum_{s>=N} fhat(s)^2                           (term2)
//       - 4 sum_{1<=|s-t|<=N-1, max(s,t)>=N} (N-|s-t|) fhat(s)fhat(t)  (term3)
//       - 4 sum_{1<=s,t<=N-1, s+t>=N+1} (s+t-N) fhat(s)fhat(t)     (term4)
//
// Infinite tails are truncated at index k_tail (default 32 N) and an upper
// bound on everything dropped is reported; tails of finite families are
// summed exactly and the bound is zero.
struct VarianceBreakdown {
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  double term4 = 0.0;
  double total = 0.0;      // term1 + term2 - term3 - term4
  double tail_bound = 0.0; // bound on the absolute truncation remainder
  std::int64_t k_tail = 0;
  std::int64_t lower_cutoff = 1;  // smallest index entering terms 1, 3, 4
};

struct VarianceOptions {
  std::int64_t k_tail = 0;  // 0 => 32 N
  // Treat fhat(k) = 0 for k > coeff_cutoff: the variance of the truncated
  // statistic S_N(f_K) is the same formula applied to f_K.
  std::optional<std::int64_t> coeff_cutoff;
};

VarianceBreakdown variance_exact(const TestFunction& f, std::int64_t n,
                                 const VarianceOptions& opts = {});

// Variance restricted to frequencies above floor(N/M): identical four-term
// structure with s, t >= floor(N/M) + 1 in terms 1, 3, 4.  This is the part
// of the variance the truncated statistic with cutoff floor(N/M) misses.
VarianceBreakdown variance_tail_exact(const TestFunction& f, std::int64_t n, int schedule_m,
                                      const VarianceOptions& opts = {});

// The three off-diagonal control sums, each o(V_N) when V_N is slowly
// varying and divergent:
//   (i)   sum_{1<=s,t<=N, s+t>=N+1} s |fhat(s)| |fhat(t)|
//   (ii)  (N+1) sum_{s>=N+1, s-t<=N, 1<=t<=N} |fhat(s)| |fhat(t)|
//   (iii) N sum_{s,t>=N, |s-t|<=N-1} |fhat(s)| |fhat(t)|
struct Lemma21Sums {
  double sum_i = 0.0;
  double sum_ii = 0.0;
  double sum_iii = 0.0;
  double tail_bound = 0.0;  // truncation remainder bound for (iii)
  std::int64_t k_tail = 0;
};

Lemma21Sums lemma21_sums(const TestFunction& f, std::int64_t n, std::int64_t k_tail = 0);

// Operator norm of the N x N matrix (A_N)_{s,t} = (1/s) 1{t >= N-s+1},
// computed as sqrt of the top eigenvalue of A^T A by power iteration with
// O(N) prefix-sum matvecs, relative tolerance 1e-10.  Bounded by 3.
double a_matrix_norm(std::int64_t n);

// The banded block (R_{N,j})_{t,s} = (1/t) 1{t-N+1 <= s <= t} for rows
// jN <= t < (j+1)N.  Operator norm by power iteration; Hilbert-Schmidt
// norm sqrt(N sum_t t^-2) in closed form.  op <= hs <= 1/j.
struct ROperatorNorm {
  double op_norm = 0.0;
  double hs_norm = 0.0;
};

ROperatorNorm r_operator_norm(std::int64_t n, std::int64_t j);

// Joint cumulant kappa(t_{k_1}, ..., t_{k_n}) of power traces where theory
// pins it down:
//   sum k_i != 0                                   -> 0
//   n = 2, k_2 = -k_1                              -> min(|k_1|, N)
//   n > 2, sum k_i = 0, sum |k_i| <= N             -> 0
// Anything else is undetermined and returned as nullopt.
std::optional<double> joint_cumulant_exact(std::span<const std::int64_t> ks, std::int64_t n);

// E prod_i |t_{k_i}|^2 for positive k_i under the moment identity
// E prod |t_{k_i}|^2 = E prod k_i phi_{k_i} (phi i.i.d. Exp(1)), valid for
// 2 sum k_i <= N; a k repeated m times contributes k^m m!.  Throws when the
// validity condition fails.
double moment_identity_rhs(std::span<const std::int64_t> ks, std::int64_t n);

}  // namespace cuestat
