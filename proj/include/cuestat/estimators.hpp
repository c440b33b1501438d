#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cuestat/common.hpp"

namespace cuestat {

// Unbiased cumulant estimate (k-statistic) of order 1..4 with a delete-one
// jackknife standard error.
Estimate empirical_cumulant(std::span<const double> samples, int order);

struct JointCumulant {
  std::complex<double> value;
  double std_err = 0.0;  // sqrt(Var(Re) + Var(Im)) of 32 batch estimates
};

// Joint cumulant kappa(X_1, ..., X_n), n <= 4, via the partition Moebius
// sum over sample moments; standard error from 32 contiguous batches.
JointCumulant empirical_joint_cumulant(
    std::span<const std::span<const std::complex<double>>> variables);

// Kolmogorov-Smirnov distance of a sample to a CDF, the max of both
// one-sided gaps at the sorted points.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::span<const double> a, std::span<const double> b);

double normal_cdf(double x, double mean = 0.0, double sigma = 1.0);

// Upper tail P(chi2_dof > x).
double chi_squared_sf(double x, double dof);

// Integrated autocorrelation time of a scalar series by Geyer's initial
// positive sequence: tau = -1 + 2 sum_m Gamma_m / gamma_0 over the leading
// positive pair sums Gamma_m = gamma_{2m} + gamma_{2m+1}.
double integrated_autocorrelation_time(std::span<const double> series);

}  // namespace cuestat
