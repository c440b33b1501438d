#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cuestat/common.hpp"
#include "cuestat/samplers.hpp"

namespace cuestat {

// Seeded Monte Carlo experiments over the ensemble samplers.  Sample i of a
// run is generated from its own random stream (root seed, stream id i), so
// results are bit-identical no matter how many OpenMP workers run the loop;
// aggregation always walks samples in index order.

enum class ExperimentKind {
  kClt,              // normalized pair statistic against the standard normal
  kLimitCompare,     // centered pair statistic against exponential-model draws
  kVarianceCheck,    // empirical variance against the exact formula
  kMomentIdentity,   // E prod |t_k|^2 against the exponential moment identity
  kCumulantCheck,    // joint trace cumulants against the exact vanishing rules
  kLemmaSums,        // deterministic off-diagonal control sums (no sampling)
  kTruncatedMoments  // central moments of the truncated sums, both models
};

enum class SamplerChoice { kDpp, kMcmc };

ExperimentKind experiment_kind_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);
SamplerChoice sampler_choice_from_string(const std::string& name);
std::string to_string(SamplerChoice choice);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kClt;
  std::string family = "power:1.5";
  std::vector<std::int64_t> n_list;
  std::int64_t truncation = 0;        // spectral cutoff K; 0 means K = N
  std::int64_t samples = 10000;
  std::int64_t limit_draws = 100000;  // exponential-model sample size
  std::uint64_t seed = 0;
  bool seed_set = false;              // experiments refuse to run unseeded
  SamplerChoice sampler = SamplerChoice::kDpp;
  double beta = 2.0;                  // MCMC target; the exact sampler is beta = 2
  McmcParams mcmc;
  std::vector<std::vector<std::int64_t>> index_lists;  // moment/cumulant tuples
  int moment_order = 3;               // truncated-moments order m
  int schedule_m = 0;                 // truncated-moments M; 0 => mn_schedule
  double delta = 0.05;                // mn_schedule slack
  std::int64_t k_tail = 0;            // variance-formula tail cut; 0 => 32 N
  double ks_threshold = 0.0;          // extra pass gate on KS distances; 0 => off
  int threads = 0;                    // OpenMP workers; 1 => serial reference loop
  bool keep_values = false;           // retain per-sample reductions for CSV dumps
};

struct ScalarEntry {
  std::string name;
  double value = 0.0;
};

struct NSummary {
  std::int64_t n = 0;
  std::vector<Estimate> estimates;   // value / std_err / reference triples
  std::vector<ScalarEntry> scalars;  // deterministic diagnostics
  bool pass = true;
};

// Raw per-sample reductions (normalized statistics, moment products, ...),
// kept only when the config asks for them; emitted as CSV, never as JSON.
struct ValueSeries {
  std::string label;
  std::int64_t n = 0;
  std::vector<double> values;
};

// Pass semantics: every estimate that carries an exact reference must land
// within 4 standard errors of it, KS gates (when configured) must hold, and
// experiment-specific joint checks must hold; otherwise the run is FAIL.
struct MonteCarloSummary {
  ExperimentConfig config;
  std::vector<NSummary> per_n;
  std::vector<ScalarEntry> metadata;  // resolved thinning, tail bounds, ...
  std::vector<ValueSeries> value_series;  // filled only when keep_values
  bool pass = true;
  double runtime_seconds = 0.0;  // reported on the console, never in files
};

MonteCarloSummary run_experiment(const ExperimentConfig& config);

// Deterministic JSON round trip.  Summaries embed the full config echo and
// seed and exclude the runtime, so re-running a printed command line
// reproduces the output byte for byte.
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json summary_to_json(const MonteCarloSummary& summary);

}  // namespace cuestat
