#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "cuestat/test_function.hpp"

namespace cuestat {

// Pair-counting statistic of an eigenangle configuration and its two
// evaluation routes:
//
//   S_N(f_K) = sum_{i != j} f_K(theta_i - theta_j)                (direct)
//            = 2 sum_{k=1..K} fhat(k) |t_k|^2 + fhat(0) N^2 - N f_K(0)
//                                                               (spectral)
//
// with power traces t_k = sum_j exp(i k theta_j).  The spectral route is
// O(NK + K); the direct route is O(N^2 K) and kept both as a cross-check
// and as the OpenMP benchmark kernel.

// t_k for k = 1..K, via a per-angle phase recurrence whose partial phases
// are renormalized periodically to stop modulus drift.
std::vector<std::complex<double>> power_traces(std::span<const double> angles,
                                               std::int64_t truncation);

// Same traces from direct cos/sin evaluation; serial oracle for tests.
std::vector<std::complex<double>> power_traces_reference(std::span<const double> angles,
                                                         std::int64_t truncation);

// Direct double sum, OpenMP-parallel over rows.  Row sums and the row
// reduction are pairwise-summed in a thread-count-independent order, so
// results are bit-identical for any number of workers.
double pair_statistic_direct(std::span<const double> angles, const TestFunction& f,
                             std::int64_t truncation);

// Plain serial double loop with running sums; reference for tests and the
// serial side of the benchmark.
double pair_statistic_direct_reference(std::span<const double> angles, const TestFunction& f,
                                       std::int64_t truncation);

double pair_statistic_spectral(std::span<const double> angles, const TestFunction& f,
                               std::int64_t truncation);

// Spectral route reusing precomputed traces t_1..t_K.
double pair_statistic_spectral(std::span<const std::complex<double>> traces, std::int64_t n,
                               const TestFunction& f, std::int64_t truncation);

// E S_N(f_K) over the unitary ensemble:
//   2 sum_{k=1..K} fhat(k) min(k, N) + fhat(0) N^2 - N f_K(0).
double expected_pair_statistic(const TestFunction& f, std::int64_t n, std::int64_t truncation);

// (S_N(f_K) - E S_N(f_K)) / sqrt(2 V_N); throws when V_N = 0.
double normalized_pair_statistic(std::span<const double> angles, const TestFunction& f,
                                 std::int64_t truncation);

}  // namespace cuestat
