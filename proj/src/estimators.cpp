#include "cuestat/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace cuestat {

namespace {

// k-statistic of the given order from power sums S_r = sum x^r of n values;
// unbiased for the cumulant of the underlying law.
double k_statistic(int order, double n, double s1, double s2, double s3, double s4) {
  switch (order) {
    case 1:
      return s1 / n;
    case 2:
      return (n * s2 - s1 * s1) / (n * (n - 1.0));
    case 3:
      return (2.0 * s1 * s1 * s1 - 3.0 * n * s1 * s2 + n * n * s3) /
             (n * (n - 1.0) * (n - 2.0));
    case 4: {
      const double num = -6.0 * s1 * s1 * s1 * s1 + 12.0 * n * s1 * s1 * s2 -
                         3.0 * n * (n - 1.0) * s2 * s2 - 4.0 * n * (n + 1.0) * s1 * s3 +
                         n * n * (n + 1.0) * s4;
      return num / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
    }
    default:
      throw std::invalid_argument("empirical_cumulant: order must be 1..4");
  }
}

// All set partitions of {0, ..., n-1} as block lists, via restricted growth
// strings; n <= 4 gives at most 15 partitions.
std::vector<std::vector<std::vector<int>>> set_partitions(int n) {
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  const auto emit = [&]() {
    const int blocks = *std::max_element(assign.begin(), assign.end()) + 1;
    std::vector<std::vector<int>> part(static_cast<std::size_t>(blocks));
    for (int i = 0; i < n; ++i) part[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].push_back(i);
    out.push_back(std::move(part));
  };
  const std::function<void(int, int)> rec = [&](int i, int max_used) {
    if (i == n) {
      emit();
      return;
    }
    for (int b = 0; b <= max_used + 1; ++b) {
      assign[static_cast<std::size_t>(i)] = b;
      rec(i + 1, std::max(max_used, b));
    }
  };
  rec(0, -1);
  return out;
}

// Joint cumulant over a sample range from the Moebius sum
// kappa = sum_pi (-1)^{|pi|-1} (|pi|-1)! prod_B mean(prod_{v in B} X_v).
std::complex<double> joint_cumulant_range(
    std::span<const std::span<const std::complex<double>>> vars,
    const std::vector<std::vector<std::vector<int>>>& partitions, std::size_t lo, std::size_t hi) {
  const int nv = static_cast<int>(vars.size());
  const std::size_t nmask = (1u << nv);
  std::vector<std::complex<double>> moment(nmask, 0.0);
  std::vector<std::complex<double>> prod(nmask);
  for (std::size_t i = lo; i < hi; ++i) {
    prod[0] = 1.0;
    for (std::size_t mask = 1; mask < nmask; ++mask) {
      const int low = std::countr_zero(mask);
      prod[mask] = prod[mask & (mask - 1)] * vars[static_cast<std::size_t>(low)][i];
    }
    for (std::size_t mask = 1; mask < nmask; ++mask) moment[mask] += prod[mask];
  }
  const double count = static_cast<double>(hi - lo);
  for (auto& m : moment) m /= count;

  std::complex<double> kappa = 0.0;
  for (const auto& part : partitions) {
    double coeff = (part.size() % 2 == 1) ? 1.0 : -1.0;  // (-1)^{|pi|-1}
    for (std::size_t b = 1; b < part.size(); ++b) coeff *= static_cast<double>(b);  // (|pi|-1)!
    std::complex<double> term = coeff;
    for (const auto& block : part) {
      std::size_t mask = 0;
      for (const int v : block) mask |= (1u << v);
      term *= moment[mask];
    }
    kappa += term;
  }
  return kappa;
}

// Regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a): series for
// x < a + 1, Lentz continued fraction otherwise.
double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  constexpr int kMaxIter = 500;
  constexpr double kEps = 3e-14;
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  constexpr double kFpMin = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / kFpMin, d = 1.0 / b, h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

Estimate empirical_cumulant(std::span<const double> samples, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("empirical_cumulant: order must be 1..4");
  const auto n = static_cast<std::int64_t>(samples.size());
  if (n < order + 1 || n < 4)
    throw std::invalid_argument("empirical_cumulant: too few samples");

  // k-statistics of order >= 2 are shift-invariant, so work on centered
  // values; this keeps the S2^2 and S1^4 combinations of k4 from cancelling
  // catastrophically.
  const double mean = pairwise_sum(samples) / static_cast<double>(n);
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (const double x : samples) {
    const double c = x - mean;
    const double c2 = c * c;
    s1 += c;
    s2 += c2;
    s3 += c2 * c;
    s4 += c2 * c2;
  }

  const double nd = static_cast<double>(n);
  const double full = k_statistic(order, nd, s1, s2, s3, s4);

  // Delete-one jackknife from the adjusted power sums.
  std::vector<double> loo(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < loo.size(); ++i) {
    const double c = samples[i] - mean;
    const double c2 = c * c;
    loo[i] = k_statistic(order, nd - 1.0, s1 - c, s2 - c2, s3 - c2 * c, s4 - c2 * c2);
  }
  const double loo_mean = pairwise_sum(loo) / nd;
  double ss = 0.0;
  for (const double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  const double se = std::sqrt((nd - 1.0) / nd * ss);

  Estimate est;
  est.name = "k" + std::to_string(order);
  est.value = (order == 1) ? mean + full - s1 / nd : full;  // undo centering for the mean
  est.std_err = se;
  return est;
}

JointCumulant empirical_joint_cumulant(
    std::span<const std::span<const std::complex<double>>> variables) {
  const int nv = static_cast<int>(variables.size());
  if (nv < 1 || nv > 4)
    throw std::invalid_argument("empirical_joint_cumulant: need 1..4 variables");
  const std::size_t n = variables[0].size();
  for (const auto& v : variables)
    if (v.size() != n) throw std::invalid_argument("empirical_joint_cumulant: length mismatch");
  constexpr std::size_t kBatches = 32;
  if (n < 2 * kBatches) throw std::invalid_argument("empirical_joint_cumulant: too few samples");

  const auto partitions = set_partitions(nv);
  JointCumulant out;
  out.value = joint_cumulant_range(variables, partitions, 0, n);

  std::vector<std::complex<double>> batch(kBatches);
  for (std::size_t b = 0; b < kBatches; ++b) {
    const std::size_t lo = n * b / kBatches;
    const std::size_t hi = n * (b + 1) / kBatches;
    batch[b] = joint_cumulant_range(variables, partitions, lo, hi);
  }
  std::complex<double> bmean = 0.0;
  for (const auto& v : batch) bmean += v;
  bmean /= static_cast<double>(kBatches);
  double var_re = 0.0, var_im = 0.0;
  for (const auto& v : batch) {
    var_re += (v.real() - bmean.real()) * (v.real() - bmean.real());
    var_im += (v.imag() - bmean.imag()) * (v.imag() - bmean.imag());
  }
  var_re /= static_cast<double>(kBatches - 1);
  var_im /= static_cast<double>(kBatches - 1);
  out.std_err = std::sqrt((var_re + var_im) / static_cast<double>(kBatches));
  return out;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> xs(a.begin(), a.end()), ys(b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double na = static_cast<double>(xs.size()), nb = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double normal_cdf(double x, double mean, double sigma) {
  return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

double chi_squared_sf(double x, double dof) {
  return gamma_q(dof / 2.0, x / 2.0);
}

double integrated_autocorrelation_time(std::span<const double> series) {
  const auto n = static_cast<std::int64_t>(series.size());
  if (n < 16) throw std::invalid_argument("integrated_autocorrelation_time: series too short");
  const double mean = pairwise_sum(series) / static_cast<double>(n);
  const auto gamma = [&](std::int64_t lag) {
    double s = 0.0;
    for (std::int64_t i = 0; i + lag < n; ++i)
      s += (series[static_cast<std::size_t>(i)] - mean) *
           (series[static_cast<std::size_t>(i + lag)] - mean);
    return s / static_cast<double>(n);
  };
  const double g0 = gamma(0);
  if (g0 <= 0.0) throw std::domain_error("integrated_autocorrelation_time: constant series");

  double acc = 0.0;
  for (std::int64_t m = 0; 2 * m + 1 < n - 1; ++m) {
    const double pair = gamma(2 * m) + gamma(2 * m + 1);
    if (pair <= 0.0) break;
    acc += pair;
  }
  return std::max(1.0, -1.0 + 2.0 * acc / g0);
}

}  // namespace cuestat
