#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "cuestat/estimators.hpp"
#include "cuestat/rng.hpp"

using namespace cuestat;

namespace {

std::vector<double> exp_draws(std::size_t n, std::uint64_t seed) {
  RandomStream rs(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = rs.exponential();
  return v;
}

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(eng);
  return v;
}

}  // namespace

TEST_CASE("k-statistics: exact small-sample values") {
  const std::vector<double> xs{0.0, 0.0, 1.0, 1.0};
  CHECK(empirical_cumulant(xs, 1).value == doctest::Approx(0.5).epsilon(1e-15));
  // Unbiased variance: sum of squared deviations over n - 1 = 1/3.
  CHECK(empirical_cumulant(xs, 2).value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const std::vector<double> flat(16, 2.5);
  for (int order : {1, 2, 3, 4}) {
    const auto est = empirical_cumulant(flat, order);
    CHECK(est.value == doctest::Approx(order == 1 ? 2.5 : 0.0));
    CHECK(est.std_err == 0.0);
  }

  CHECK_THROWS_AS(empirical_cumulant(xs, 0), std::invalid_argument);
  CHECK_THROWS_AS(empirical_cumulant(xs, 5), std::invalid_argument);
  const std::vector<double> two{0.0, 1.0};
  CHECK_THROWS_AS(empirical_cumulant(two, 2), std::invalid_argument);
}

TEST_CASE("k-statistics recover Exp(1) and N(0,1) cumulants") {
  // Exp(1): kappa_m = (m-1)!.
  const auto ed = exp_draws(1000000, 7);
  const double want_exp[] = {1.0, 1.0, 2.0, 6.0};
  for (int order = 1; order <= 4; ++order) {
    const auto est = empirical_cumulant(ed, order);
    CAPTURE(order);
    CHECK(est.std_err > 0.0);
    CHECK(std::abs(est.value - want_exp[order - 1]) <= 4.0 * est.std_err);
  }

  const auto nd = normal_draws(400000, 11);
  const double want_normal[] = {0.0, 1.0, 0.0, 0.0};
  for (int order = 1; order <= 4; ++order) {
    const auto est = empirical_cumulant(nd, order);
    CAPTURE(order);
    CHECK(std::abs(est.value - want_normal[order - 1]) <= 4.0 * est.std_err);
  }

  // The jackknife error shrinks like 1/sqrt(n).
  const auto small = std::span<const double>(ed).first(10000);
  const double ratio = empirical_cumulant(small, 2).std_err / empirical_cumulant(ed, 2).std_err;
  CHECK(ratio == doctest::Approx(10.0).epsilon(0.25));
}

TEST_CASE("joint cumulants of synthetic complex variables") {
  std::mt19937_64 eng(99);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  const std::size_t n = 200000;
  std::vector<std::complex<double>> z(n), zc(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = {nd(eng), nd(eng)};  // E|z|^2 = 1
    zc[i] = std::conj(z[i]);
    w[i] = {nd(eng), nd(eng)};  // independent of z
  }

  using VarSpan = std::span<const std::complex<double>>;
  const std::vector<VarSpan> pair{VarSpan(z), VarSpan(zc)};
  const auto kzz = empirical_joint_cumulant(pair);
  CHECK(kzz.std_err > 0.0);
  CHECK(std::abs(kzz.value.real() - 1.0) <= 4.0 * kzz.std_err);
  CHECK(std::abs(kzz.value.imag()) <= 4.0 * kzz.std_err);

  // Rotation-invariant law: E z^2 = 0.
  const std::vector<VarSpan> same{VarSpan(z), VarSpan(z)};
  const auto kz2 = empirical_joint_cumulant(same);
  CHECK(std::abs(kz2.value) <= 4.0 * kz2.std_err);

  // Cumulants vanish across independent factors.
  const std::vector<VarSpan> indep{VarSpan(z), VarSpan(zc), VarSpan(w)};
  const auto k3 = empirical_joint_cumulant(indep);
  CHECK(std::abs(k3.value) <= 4.0 * k3.std_err);

  const std::vector<std::complex<double>> shorter(n - 1);
  const std::vector<VarSpan> bad{VarSpan(z), VarSpan(shorter)};
  CHECK_THROWS_AS(empirical_joint_cumulant(bad), std::invalid_argument);
  const std::vector<std::complex<double>> tiny(10);
  const std::vector<VarSpan> few{VarSpan(tiny)};
  CHECK_THROWS_AS(empirical_joint_cumulant(few), std::invalid_argument);
}

TEST_CASE("Kolmogorov-Smirnov distances") {
  const auto uniform01 = [](double x) { return std::min(1.0, std::max(0.0, x)); };

  // One point at the median: both one-sided gaps are 1/2.
  const std::vector<double> med{0.5};
  CHECK(ks_distance(med, uniform01) == doctest::Approx(0.5).epsilon(1e-15));

  // Centered grid: the classic 1/(2n) floor.
  std::vector<double> grid(100);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (static_cast<double>(i) + 0.5) / 100.0;
  CHECK(ks_distance(grid, uniform01) == doctest::Approx(0.005).epsilon(1e-12));

  // Two-sample: identical, disjoint, interleaved.
  const std::vector<double> a{1.0, 3.0}, b{2.0, 4.0}, c{5.0, 6.0};
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(ks_distance(a, c) == 1.0);
  CHECK(ks_distance(a, b) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, uniform01), std::invalid_argument);
}

TEST_CASE("normal CDF and chi-squared tail") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
  CHECK(normal_cdf(3.0, 1.0, 2.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-14));

  // Closed forms: dof 2 -> e^{-x/2}; dof 4 -> e^{-x/2}(1 + x/2);
  // dof 1 -> erfc(sqrt(x/2)).
  CHECK(chi_squared_sf(3.0, 2.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK(chi_squared_sf(5.0, 4.0) == doctest::Approx(std::exp(-2.5) * 3.5).epsilon(1e-12));
  CHECK(chi_squared_sf(4.0, 1.0) == doctest::Approx(std::erfc(std::sqrt(2.0))).epsilon(1e-10));
  CHECK(chi_squared_sf(0.0, 8.0) == 1.0);
  CHECK(chi_squared_sf(63.0, 63.0) > 0.4);
  CHECK(chi_squared_sf(63.0, 63.0) < 0.6);
  CHECK_THROWS_AS(chi_squared_sf(-1.0, 2.0), std::invalid_argument);
}

TEST_CASE("integrated autocorrelation time") {
  // White noise: tau = 1.
  const auto wn = normal_draws(100000, 5);
  CHECK(integrated_autocorrelation_time(wn) == doctest::Approx(1.0).epsilon(0.1));

  // AR(1) with rho = 0.6: tau = (1 + rho)/(1 - rho) = 4.
  std::mt19937_64 eng(17);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double rho = 0.6;
  std::vector<double> ar(200000);
  double x = 0.0;
  for (auto& v : ar) {
    x = rho * x + std::sqrt(1.0 - rho * rho) * nd(eng);
    v = x;
  }
  CHECK(integrated_autocorrelation_time(ar) == doctest::Approx(4.0).epsilon(0.15));

  const std::vector<double> flat(100, 1.0);
  CHECK_THROWS_AS(integrated_autocorrelation_time(flat), std::domain_error);
  const std::vector<double> tiny{1.0, 2.0};
  CHECK_THROWS_AS(integrated_autocorrelation_time(tiny), std::invalid_argument);
}
