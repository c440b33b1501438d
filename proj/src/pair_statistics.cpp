#include "cuestat/pair_statistics.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cuestat/common.hpp"

namespace cuestat {

namespace {

constexpr int kRenormEvery = 256;

void require_angles(std::span<const double> angles) {
  if (angles.empty()) throw std::invalid_argument("pair statistic: empty configuration");
}

// f_K(theta_i - theta_j) summed over j != i for one fixed i; cos(k d) runs
// on the Chebyshev recurrence so the inner cost is O(K) flops per pair.
double row_sum_pairwise(std::span<const double> angles, const TestFunction& f,
                        std::int64_t truncation, std::size_t i, std::vector<double>& buf) {
  buf.clear();
  for (std::size_t j = 0; j < angles.size(); ++j) {
    if (j == i) continue;
    buf.push_back(f.evaluate(angles[i] - angles[j], truncation));
  }
  return pairwise_sum(buf);
}

}  // namespace

std::vector<std::complex<double>> power_traces(std::span<const double> angles,
                                               std::int64_t truncation) {
  require_angles(angles);
  if (truncation < 0) throw std::invalid_argument("power_traces: truncation must be >= 0");
  const std::size_t n = angles.size();
  const auto kmax = static_cast<std::size_t>(truncation);

  std::vector<double> zr(n), zi(n), wr(n), wi(n);
  for (std::size_t j = 0; j < n; ++j) {
    wr[j] = std::cos(angles[j]);
    wi[j] = std::sin(angles[j]);
    zr[j] = wr[j];
    zi[j] = wi[j];
  }

  std::vector<std::complex<double>> traces(kmax);
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double re =
        indexed_pairwise_sum(0, static_cast<std::int64_t>(n), [&](std::int64_t j) { return zr[j]; });
    const double im =
        indexed_pairwise_sum(0, static_cast<std::int64_t>(n), [&](std::int64_t j) { return zi[j]; });
    traces[k - 1] = {re, im};
    if (k == kmax) break;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = zr[j] * wr[j] - zi[j] * wi[j];
      const double s = zr[j] * wi[j] + zi[j] * wr[j];
      zr[j] = r;
      zi[j] = s;
    }
    if (k % kRenormEvery == 0) {
      for (std::size_t j = 0; j < n; ++j) {
        const double m = std::sqrt(zr[j] * zr[j] + zi[j] * zi[j]);
        zr[j] /= m;
        zi[j] /= m;
      }
    }
  }
  return traces;
}

std::vector<std::complex<double>> power_traces_reference(std::span<const double> angles,
                                                         std::int64_t truncation) {
  require_angles(angles);
  if (truncation < 0) throw std::invalid_argument("power_traces: truncation must be >= 0");
  std::vector<std::complex<double>> traces(static_cast<std::size_t>(truncation));
  for (std::int64_t k = 1; k <= truncation; ++k) {
    double re = 0.0, im = 0.0;
    for (const double theta : angles) {
      re += std::cos(static_cast<double>(k) * theta);
      im += std::sin(static_cast<double>(k) * theta);
    }
    traces[static_cast<std::size_t>(k - 1)] = {re, im};
  }
  return traces;
}

double pair_statistic_direct(std::span<const double> angles, const TestFunction& f,
                             std::int64_t truncation) {
  require_angles(angles);
  const auto n = static_cast<std::int64_t>(angles.size());
  std::vector<double> rows(static_cast<std::size_t>(n));
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i)
      rows[static_cast<std::size_t>(i)] =
          row_sum_pairwise(angles, f, truncation, static_cast<std::size_t>(i), buf);
  }
  return pairwise_sum(rows);
}

double pair_statistic_direct_reference(std::span<const double> angles, const TestFunction& f,
                                       std::int64_t truncation) {
  require_angles(angles);
  double total = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i)
    for (std::size_t j = 0; j < angles.size(); ++j) {
      if (i == j) continue;
      total += f.evaluate(angles[i] - angles[j], truncation);
    }
  return total;
}

double pair_statistic_spectral(std::span<const std::complex<double>> traces, std::int64_t n,
                               const TestFunction& f, std::int64_t truncation) {
  if (n < 1) throw std::invalid_argument("pair statistic: N must be >= 1");
  if (static_cast<std::int64_t>(traces.size()) < truncation)
    throw std::invalid_argument("pair statistic: traces shorter than truncation");
  const double nd = static_cast<double>(n);
  const double quad = 2.0 * indexed_pairwise_sum(1, truncation + 1, [&](std::int64_t k) {
                        return f.coeff(k) * std::norm(traces[static_cast<std::size_t>(k - 1)]);
                      });
  return quad + f.coeff(0) * nd * nd - nd * f.value_at_zero(truncation);
}

double pair_statistic_spectral(std::span<const double> angles, const TestFunction& f,
                               std::int64_t truncation) {
  require_angles(angles);
  const auto traces = power_traces(angles, truncation);
  return pair_statistic_spectral(traces, static_cast<std::int64_t>(angles.size()), f, truncation);
}

double expected_pair_statistic(const TestFunction& f, std::int64_t n, std::int64_t truncation) {
  if (n < 1) throw std::invalid_argument("pair statistic: N must be >= 1");
  if (truncation < 0) throw std::invalid_argument("pair statistic: truncation must be >= 0");
  const double nd = static_cast<double>(n);
  const double quad = 2.0 * indexed_pairwise_sum(1, truncation + 1, [&](std::int64_t k) {
                        return f.coeff(k) * static_cast<double>(std::min(k, n));
                      });
  return quad + f.coeff(0) * nd * nd - nd * f.value_at_zero(truncation);
}

double normalized_pair_statistic(std::span<const double> angles, const TestFunction& f,
                                 std::int64_t truncation) {
  require_angles(angles);
  const auto n = static_cast<std::int64_t>(angles.size());
  const double vn = v_n(f, n);
  if (vn <= 0.0)
    throw std::domain_error("normalized pair statistic: V_N = 0 for " + f.spec());
  const double s = pair_statistic_spectral(angles, f, truncation);
  return (s - expected_pair_statistic(f, n, truncation)) / std::sqrt(2.0 * vn);
}

}  // namespace cuestat
