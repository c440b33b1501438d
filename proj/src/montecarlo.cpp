#include "cuestat/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cuestat/estimators.hpp"
#include "cuestat/exact_theory.hpp"
#include "cuestat/limit_laws.hpp"
#include "cuestat/pair_statistics.hpp"
#include "cuestat/test_function.hpp"

namespace cuestat {
namespace {

// Acceptance band for estimates carrying an exact reference: two-sided
// normal tail beyond 4 sigma is about 6e-5 per check.
constexpr double kSigmaBand = 4.0;

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::kClt, "clt"},
    {ExperimentKind::kLimitCompare, "limit-compare"},
    {ExperimentKind::kVarianceCheck, "variance-check"},
    {ExperimentKind::kMomentIdentity, "moment-identity"},
    {ExperimentKind::kCumulantCheck, "cumulant-check"},
    {ExperimentKind::kLemmaSums, "lemma-sums"},
    {ExperimentKind::kTruncatedMoments, "truncated-moments"},
};

constexpr std::pair<SamplerChoice, const char*> kSamplerNames[] = {
    {SamplerChoice::kDpp, "dpp"},
    {SamplerChoice::kMcmc, "mcmc"},
};

// Runs body(i) for i in [0, count); parallel across OpenMP workers unless
// threads == 1.  Slot writes keyed by i keep results independent of the
// schedule; the first failure wins and is rethrown with its sample index.
template <typename Body>
void run_indexed(std::int64_t count, int threads, Body&& body) {
  std::atomic<bool> failed{false};
  std::mutex guard;
  std::string message;
  auto guarded = [&](std::int64_t i) {
    if (failed.load(std::memory_order_relaxed)) return;
    try {
      body(i);
    } catch (const std::exception& e) {
      const std::lock_guard<std::mutex> lock(guard);
      if (!failed.exchange(true))
        message = "sample " + std::to_string(i) + ": " + e.what();
    }
  };
#ifdef _OPENMP
  if (threads != 1) {
    const int workers = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::int64_t i = 0; i < count; ++i) guarded(i);
  } else
#endif
  {
    for (std::int64_t i = 0; i < count; ++i) guarded(i);
  }
  if (failed.load()) throw SamplingError(message);
}

struct SamplerSpec {
  SamplerChoice choice = SamplerChoice::kDpp;
  double beta = 2.0;
  McmcParams mcmc;  // thinning resolved before any sample is drawn
};

EigenvalueSample draw_sample(std::int64_t n, const SamplerSpec& spec, RandomStream& stream) {
  if (spec.choice == SamplerChoice::kDpp) return sample_cue(n, stream);
  return sample_cbe_mcmc(n, spec.beta, spec.mcmc, stream);
}

template <typename Reduce>
std::vector<double> collect_values(std::int64_t n, const ExperimentConfig& config,
                                   const SamplerSpec& sampler, Reduce&& reduce) {
  std::vector<double> values(static_cast<std::size_t>(config.samples));
  run_indexed(config.samples, config.threads, [&](std::int64_t i) {
    RandomStream stream(config.seed, static_cast<std::uint64_t>(i));
    const EigenvalueSample sample = draw_sample(n, sampler, stream);
    values[static_cast<std::size_t>(i)] = reduce(sample.angles);
  });
  return values;
}

// Power traces t_1..t_kmax of every sample, flattened row-major.
std::vector<std::complex<double>> collect_traces(std::int64_t n, std::int64_t kmax,
                                                 const ExperimentConfig& config,
                                                 const SamplerSpec& sampler) {
  std::vector<std::complex<double>> traces(
      static_cast<std::size_t>(config.samples * kmax));
  run_indexed(config.samples, config.threads, [&](std::int64_t i) {
    RandomStream stream(config.seed, static_cast<std::uint64_t>(i));
    const EigenvalueSample sample = draw_sample(n, sampler, stream);
    const auto row = power_traces(sample.angles, kmax);
    std::copy(row.begin(), row.end(), traces.begin() + i * kmax);
  });
  return traces;
}

Estimate make_estimate(std::string name, std::span<const double> values, int order,
                       std::optional<double> reference) {
  Estimate est = empirical_cumulant(values, order);
  est.name = std::move(name);
  est.reference = reference;
  return est;
}

bool references_ok(const std::vector<Estimate>& estimates) {
  return std::all_of(estimates.begin(), estimates.end(),
                     [](const Estimate& e) { return e.within(kSigmaBand); });
}

std::string tuple_label(const char* prefix, std::span<const std::int64_t> ks) {
  std::string label = prefix;
  label += '[';
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (i > 0) label += ',';
    label += std::to_string(ks[i]);
  }
  label += ']';
  return label;
}

double positive_variance_scale(const TestFunction& f, std::int64_t n) {
  const double vn = v_n(f, n);
  if (!(vn > 0.0))
    throw std::invalid_argument("experiment: variance scale V_N of \"" + f.spec() +
                                "\" vanishes at N = " + std::to_string(n));
  return vn;
}

void push_mcmc_scalars(NSummary& rec, std::int64_t n, const SamplerSpec& sampler) {
  if (sampler.choice != SamplerChoice::kMcmc) return;
  const McmcParams& m = sampler.mcmc;
  rec.scalars.push_back({"mcmc_proposal_width",
                         m.proposal_width > 0.0 ? m.proposal_width : kTwoPi / static_cast<double>(n)});
  rec.scalars.push_back({"mcmc_burn_in_sweeps",
                         static_cast<double>(m.burn_in_sweeps > 0 ? m.burn_in_sweeps : 100 * n)});
  rec.scalars.push_back({"mcmc_thinning_sweeps", static_cast<double>(m.thinning_sweeps)});
}

NSummary run_clt(const TestFunction& f, std::int64_t n, const ExperimentConfig& config,
                 const SamplerSpec& sampler, std::vector<ValueSeries>& series_sink) {
  const std::int64_t trunc = config.truncation > 0 ? config.truncation : n;
  const double vn = positive_variance_scale(f, n);
  const double scale = std::sqrt(2.0 * vn);
  const double expectation = expected_pair_statistic(f, n, trunc);
  VarianceOptions opts;
  opts.k_tail = config.k_tail;
  opts.coeff_cutoff = trunc;
  const VarianceBreakdown vb = variance_exact(f, n, opts);

  const std::vector<double> values =
      collect_values(n, config, sampler, [&](std::span<const double> angles) {
        return (pair_statistic_spectral(angles, f, trunc) - expectation) / scale;
      });

  NSummary rec;
  rec.n = n;
  rec.estimates.push_back(make_estimate("mean", values, 1, 0.0));
  rec.estimates.push_back(make_estimate("variance", values, 2, vb.total / (2.0 * vn)));
  rec.estimates.push_back(make_estimate("cumulant3", values, 3, std::nullopt));
  rec.estimates.push_back(make_estimate("cumulant4", values, 4, std::nullopt));
  const double ks =
      ks_distance(values, [](double x) { return normal_cdf(x); });
  rec.scalars.push_back({"ks_normal", ks});
  rec.scalars.push_back({"v_n", vn});
  rec.scalars.push_back({"variance_exact", vb.total});
  rec.scalars.push_back({"variance_ratio", vb.total / (2.0 * vn)});
  rec.scalars.push_back({"truncation", static_cast<double>(trunc)});
  rec.scalars.push_back({"coeff_tail_abs", 2.0 * f.abs_tail_bound(trunc)});
  rec.pass = references_ok(rec.estimates);
  if (config.keep_values) series_sink.push_back({"normalized", n, values});
  return rec;
}

NSummary run_limit_compare(const TestFunction& f, std::int64_t n, const ExperimentConfig& config,
                           const SamplerSpec& sampler, std::vector<ValueSeries>& series_sink) {
  const std::int64_t trunc = config.truncation > 0 ? config.truncation : n;
  positive_variance_scale(f, n);
  const double expectation = expected_pair_statistic(f, n, trunc);
  VarianceOptions opts;
  opts.k_tail = config.k_tail;
  opts.coeff_cutoff = trunc;
  const VarianceBreakdown vb = variance_exact(f, n, opts);

  const std::vector<double> values =
      collect_values(n, config, sampler, [&](std::span<const double> angles) {
        return pair_statistic_spectral(angles, f, trunc) - expectation;
      });
  const std::vector<double> limit_draws =
      sample_limit_law(f, trunc, config.limit_draws, config.seed);

  NSummary rec;
  rec.n = n;
  rec.estimates.push_back(make_estimate("mean", values, 1, 0.0));
  rec.estimates.push_back(make_estimate("variance", values, 2, vb.total));
  rec.estimates.push_back(make_estimate("cumulant3", values, 3, std::nullopt));
  rec.estimates.push_back(make_estimate("cumulant4", values, 4, std::nullopt));

  const double ks_limit = ks_distance(values, limit_draws);
  const double mean = rec.estimates[0].value;
  const double sd = std::sqrt(std::max(rec.estimates[1].value, 0.0));
  const double ks_gauss =
      sd > 0.0 ? ks_distance(values, [&](double x) { return normal_cdf(x, mean, sd); }) : 1.0;
  rec.scalars.push_back({"ks_limit", ks_limit});
  rec.scalars.push_back({"ks_normal_bestfit", ks_gauss});
  rec.scalars.push_back({"limit_cumulant2", limit_law_cumulant(f, trunc, 2)});
  rec.scalars.push_back({"limit_cumulant3", limit_law_cumulant(f, trunc, 3)});
  rec.scalars.push_back({"limit_cumulant4", limit_law_cumulant(f, trunc, 4)});
  rec.scalars.push_back({"truncation", static_cast<double>(trunc)});
  rec.scalars.push_back({"coeff_tail_abs", 2.0 * f.abs_tail_bound(trunc)});
  rec.pass = references_ok(rec.estimates);
  if (config.ks_threshold > 0.0)
    rec.pass = rec.pass && ks_limit <= config.ks_threshold && ks_gauss > ks_limit;
  if (config.keep_values) {
    series_sink.push_back({"centered", n, values});
    series_sink.push_back({"limit_draw", n, limit_draws});
  }
  return rec;
}

NSummary run_variance_check(const TestFunction& f, std::int64_t n, const ExperimentConfig& config,
                            const SamplerSpec& sampler, std::vector<ValueSeries>& series_sink) {
  const std::int64_t trunc = config.truncation > 0 ? config.truncation : n;
  const double expectation = expected_pair_statistic(f, n, trunc);
  VarianceOptions opts;
  opts.k_tail = config.k_tail;
  opts.coeff_cutoff = trunc;
  const VarianceBreakdown vb = variance_exact(f, n, opts);

  const std::vector<double> values =
      collect_values(n, config, sampler, [&](std::span<const double> angles) {
        return pair_statistic_spectral(angles, f, trunc);
      });

  NSummary rec;
  rec.n = n;
  rec.estimates.push_back(make_estimate("mean", values, 1, expectation));
  rec.estimates.push_back(make_estimate("variance", values, 2, vb.total));
  rec.scalars.push_back({"variance_term1", vb.term1});
  rec.scalars.push_back({"variance_term2", vb.term2});
  rec.scalars.push_back({"variance_term3", vb.term3});
  rec.scalars.push_back({"variance_term4", vb.term4});
  rec.scalars.push_back({"variance_formula_tail_bound", vb.tail_bound});
  rec.scalars.push_back({"truncation", static_cast<double>(trunc)});
  rec.scalars.push_back({"coeff_tail_abs", 2.0 * f.abs_tail_bound(trunc)});
  rec.pass = references_ok(rec.estimates);
  if (config.keep_values) series_sink.push_back({"statistic", n, values});
  return rec;
}

NSummary run_moment_identity(std::int64_t n, const ExperimentConfig& config,
                             const SamplerSpec& sampler, std::vector<ValueSeries>& series_sink) {
  if (config.index_lists.empty())
    throw std::invalid_argument("experiment: moment-identity needs index lists");
  std::int64_t kmax = 0;
  for (const auto& ks : config.index_lists) {
    if (ks.empty()) throw std::invalid_argument("experiment: empty index tuple");
    for (std::int64_t k : ks) {
      if (k < 1) throw std::invalid_argument("experiment: moment indices must be >= 1");
      kmax = std::max(kmax, k);
    }
  }

  const std::vector<std::complex<double>> traces = collect_traces(n, kmax, config, sampler);
  const std::size_t count = static_cast<std::size_t>(config.samples);

  NSummary rec;
  rec.n = n;
  std::vector<double> series(count);
  for (const auto& ks : config.index_lists) {
    for (std::size_t i = 0; i < count; ++i) {
      double prod = 1.0;
      for (std::int64_t k : ks) prod *= std::norm(traces[i * kmax + (k - 1)]);
      series[i] = prod;
    }
    std::optional<double> reference;
    std::int64_t ksum = 0;
    for (std::int64_t k : ks) ksum += k;
    if (ks.size() == 1) {
      reference = static_cast<double>(std::min(ks[0], n));  // E|t_k|^2 = min(k, N)
    } else if (2 * ksum <= n) {
      reference = moment_identity_rhs(ks, n);
    }
    rec.estimates.push_back(make_estimate(tuple_label("moment", ks), series, 1, reference));
    if (config.keep_values) series_sink.push_back({tuple_label("moment", ks), n, series});
  }
  rec.scalars.push_back({"k_max", static_cast<double>(kmax)});
  rec.pass = references_ok(rec.estimates);
  return rec;
}

NSummary run_cumulant_check(std::int64_t n, const ExperimentConfig& config,
                            const SamplerSpec& sampler) {
  if (config.index_lists.empty())
    throw std::invalid_argument("experiment: cumulant-check needs index lists");
  std::int64_t kmax = 0;
  for (const auto& ks : config.index_lists) {
    if (ks.empty() || ks.size() > 4)
      throw std::invalid_argument("experiment: cumulant tuples must have 1..4 indices");
    for (std::int64_t k : ks) {
      if (k == 0) throw std::invalid_argument("experiment: cumulant indices must be nonzero");
      kmax = std::max(kmax, std::abs(k));
    }
  }

  const std::vector<std::complex<double>> traces = collect_traces(n, kmax, config, sampler);
  const std::size_t count = static_cast<std::size_t>(config.samples);

  NSummary rec;
  rec.n = n;
  for (const auto& ks : config.index_lists) {
    std::vector<std::vector<std::complex<double>>> vars(
        ks.size(), std::vector<std::complex<double>>(count));
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const std::int64_t k = ks[j];
      const std::size_t col = static_cast<std::size_t>(std::abs(k)) - 1;
      for (std::size_t i = 0; i < count; ++i) {
        const std::complex<double> t = traces[i * kmax + col];
        vars[j][i] = k > 0 ? t : std::conj(t);  // t_{-k} = conj(t_k)
      }
    }
    std::vector<std::span<const std::complex<double>>> spans(vars.begin(), vars.end());
    const JointCumulant jc = empirical_joint_cumulant(spans);
    const std::optional<double> exact = joint_cumulant_exact(ks, n);

    Estimate re;
    re.name = tuple_label("kappa", ks) + ".re";
    re.value = jc.value.real();
    re.std_err = jc.std_err;
    re.reference = exact;
    Estimate im;
    im.name = tuple_label("kappa", ks) + ".im";
    im.value = jc.value.imag();
    im.std_err = jc.std_err;
    if (exact) im.reference = 0.0;
    rec.estimates.push_back(std::move(re));
    rec.estimates.push_back(std::move(im));
  }
  rec.scalars.push_back({"k_max", static_cast<double>(kmax)});
  rec.pass = references_ok(rec.estimates);
  return rec;
}

NSummary run_truncated_moments(const TestFunction& f, std::int64_t n,
                               const ExperimentConfig& config, const SamplerSpec& sampler,
                               std::vector<ValueSeries>& series_sink) {
  const int order = config.moment_order;
  const int schedule =
      config.schedule_m > 0 ? config.schedule_m : mn_schedule(f, n, config.delta);
  const std::int64_t cutoff = n / schedule;
  if (cutoff < 1)
    throw std::invalid_argument("experiment: cutoff floor(N/M) is empty at N = " +
                                std::to_string(n) + ", M = " + std::to_string(schedule));
  positive_variance_scale(f, n);

  const std::vector<double> values =
      collect_values(n, config, sampler, [&](std::span<const double> angles) {
        const auto traces = power_traces(angles, cutoff);
        return 2.0 * indexed_pairwise_sum(1, cutoff + 1, [&](std::int64_t k) {
                 return f.coeff(k) *
                        (std::norm(traces[static_cast<std::size_t>(k - 1)]) -
                         static_cast<double>(k));
               });
      });
  const std::vector<double> exp_draws =
      sample_limit_law(f, cutoff, config.limit_draws, config.seed);

  // All joint trace moments entering the order-m cumulant stay inside the
  // exponential moment identity's range iff 2 m cutoff <= N; m < M/2
  // guarantees that, and then the two models share cumulants exactly.
  const bool identity_exact = 2 * static_cast<std::int64_t>(order) * cutoff <= n;
  const double kappa = limit_law_cumulant(f, cutoff, order);

  NSummary rec;
  rec.n = n;
  rec.estimates.push_back(make_estimate(
      "trace_model", values, order,
      identity_exact ? std::optional<double>(kappa) : std::nullopt));
  rec.estimates.push_back(make_estimate("exponential_model", exp_draws, order, kappa));

  const double gap = std::abs(rec.estimates[0].value - rec.estimates[1].value);
  const double joint_se = std::hypot(rec.estimates[0].std_err, rec.estimates[1].std_err);
  rec.scalars.push_back({"schedule_m", static_cast<double>(schedule)});
  rec.scalars.push_back({"schedule_m_auto", static_cast<double>(mn_schedule(f, n, config.delta))});
  rec.scalars.push_back({"cutoff", static_cast<double>(cutoff)});
  rec.scalars.push_back({"moment_order", static_cast<double>(order)});
  rec.scalars.push_back({"identity_exact", identity_exact ? 1.0 : 0.0});
  rec.scalars.push_back({"joint_gap", gap});
  rec.scalars.push_back({"joint_se", joint_se});
  rec.scalars.push_back({"v_n", v_n(f, n)});
  rec.scalars.push_back({"v_cutoff", v_n(f, cutoff)});
  rec.scalars.push_back({"variance_above_cutoff", variance_tail_exact(f, n, schedule).total});
  rec.pass = references_ok(rec.estimates) && gap <= kSigmaBand * joint_se;
  if (config.keep_values) {
    series_sink.push_back({"trace_model", n, values});
    series_sink.push_back({"exponential_model", n, exp_draws});
  }
  return rec;
}

NSummary run_lemma_sums(const TestFunction& f, std::int64_t n, const ExperimentConfig& config) {
  const Lemma21Sums sums = lemma21_sums(f, n, config.k_tail);
  const double vn = positive_variance_scale(f, n);
  const double anorm = a_matrix_norm(n);

  NSummary rec;
  rec.n = n;
  rec.scalars.push_back({"sum_i", sums.sum_i});
  rec.scalars.push_back({"sum_ii", sums.sum_ii});
  rec.scalars.push_back({"sum_iii", sums.sum_iii});
  rec.scalars.push_back({"ratio_i", sums.sum_i / vn});
  rec.scalars.push_back({"ratio_ii", sums.sum_ii / vn});
  rec.scalars.push_back({"ratio_iii", sums.sum_iii / vn});
  rec.scalars.push_back({"v_n", vn});
  rec.scalars.push_back({"a_matrix_norm", anorm});
  rec.scalars.push_back({"lemma_tail_bound", sums.tail_bound});
  rec.pass = anorm <= 3.0 + 1e-9;
  return rec;
}

double scalar_value(const NSummary& rec, const std::string& name) {
  for (const auto& s : rec.scalars)
    if (s.name == name) return s.value;
  throw std::logic_error("summary scalar missing: " + name);
}

void validate_config(const ExperimentConfig& config) {
  if (!config.seed_set) throw std::invalid_argument("experiment: seed required");
  if (config.n_list.empty()) throw std::invalid_argument("experiment: n_list must be nonempty");
  for (std::int64_t n : config.n_list)
    if (n < 1) throw std::invalid_argument("experiment: N must be >= 1");
  if (config.samples < 2) throw std::invalid_argument("experiment: sample count must be >= 2");
  if (config.limit_draws < 2)
    throw std::invalid_argument("experiment: limit_draws must be >= 2");
  if (config.beta < 0.0) throw std::invalid_argument("experiment: beta must be >= 0");
  if (config.sampler == SamplerChoice::kDpp && config.beta != 2.0)
    throw std::invalid_argument("experiment: the dpp sampler is exact only at beta = 2");
  if (config.moment_order < 1 || config.moment_order > 4)
    throw std::invalid_argument("experiment: moment_order must be 1..4");
  if (config.schedule_m != 0 && config.schedule_m < 2)
    throw std::invalid_argument("experiment: schedule_m must be 0 (auto) or >= 2");
  if (!(config.delta > 0.0)) throw std::invalid_argument("experiment: delta must be > 0");
  if (config.ks_threshold < 0.0)
    throw std::invalid_argument("experiment: ks_threshold must be >= 0");
  if (config.threads < 0) throw std::invalid_argument("experiment: threads must be >= 0");
}

}  // namespace

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& [kind, text] : kKindNames)
    if (name == text) return kind;
  throw std::invalid_argument("unknown experiment kind \"" + name + "\"");
}

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, text] : kKindNames)
    if (k == kind) return text;
  throw std::invalid_argument("unknown experiment kind");
}

SamplerChoice sampler_choice_from_string(const std::string& name) {
  for (const auto& [choice, text] : kSamplerNames)
    if (name == text) return choice;
  throw std::invalid_argument("unknown sampler \"" + name + "\"");
}

std::string to_string(SamplerChoice choice) {
  for (const auto& [c, text] : kSamplerNames)
    if (c == choice) return text;
  throw std::invalid_argument("unknown sampler");
}

MonteCarloSummary run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  const TestFunction f = TestFunction::parse(config.family);

  MonteCarloSummary summary;
  summary.config = config;
  summary.pass = true;

  for (const std::int64_t n : config.n_list) {
    SamplerSpec sampler{config.sampler, config.beta, config.mcmc};
    const bool draws_samples = config.kind != ExperimentKind::kLemmaSums;
    if (draws_samples && sampler.choice == SamplerChoice::kMcmc &&
        sampler.mcmc.thinning_sweeps <= 0) {
      sampler.mcmc.thinning_sweeps =
          resolve_thinning(n, sampler.beta, sampler.mcmc, config.seed);
    }

    NSummary rec;
    switch (config.kind) {
      case ExperimentKind::kClt:
        rec = run_clt(f, n, config, sampler, summary.value_series);
        break;
      case ExperimentKind::kLimitCompare:
        rec = run_limit_compare(f, n, config, sampler, summary.value_series);
        break;
      case ExperimentKind::kVarianceCheck:
        rec = run_variance_check(f, n, config, sampler, summary.value_series);
        break;
      case ExperimentKind::kMomentIdentity:
        rec = run_moment_identity(n, config, sampler, summary.value_series);
        break;
      case ExperimentKind::kCumulantCheck:
        rec = run_cumulant_check(n, config, sampler);
        break;
      case ExperimentKind::kLemmaSums:
        rec = run_lemma_sums(f, n, config);
        break;
      case ExperimentKind::kTruncatedMoments:
        rec = run_truncated_moments(f, n, config, sampler, summary.value_series);
        break;
    }
    if (draws_samples) push_mcmc_scalars(rec, n, sampler);
    summary.per_n.push_back(std::move(rec));
  }

  for (const auto& rec : summary.per_n) summary.pass = summary.pass && rec.pass;

  if (config.kind == ExperimentKind::kLemmaSums && summary.per_n.size() >= 2) {
    bool decreasing = true;
    for (const char* name : {"ratio_i", "ratio_ii", "ratio_iii"})
      for (std::size_t i = 1; i < summary.per_n.size(); ++i)
        decreasing = decreasing && scalar_value(summary.per_n[i], name) <
                                       scalar_value(summary.per_n[i - 1], name);
    summary.metadata.push_back({"ratios_decreasing", decreasing ? 1.0 : 0.0});
    summary.pass = summary.pass && decreasing;
  }

  if (config.kind == ExperimentKind::kClt && config.ks_threshold > 0.0) {
    bool nonincreasing = true;
    for (std::size_t i = 1; i < summary.per_n.size(); ++i)
      nonincreasing = nonincreasing && scalar_value(summary.per_n[i], "ks_normal") <=
                                           scalar_value(summary.per_n[i - 1], "ks_normal");
    const double ks_final = scalar_value(summary.per_n.back(), "ks_normal");
    summary.metadata.push_back({"ks_nonincreasing", nonincreasing ? 1.0 : 0.0});
    summary.metadata.push_back({"ks_final", ks_final});
    summary.pass = summary.pass && nonincreasing && ks_final <= config.ks_threshold;
  }

  summary.metadata.push_back({"sigma_band", kSigmaBand});
  summary.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

namespace {

nlohmann::ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0.0 ? "inf" : "-inf";
}

void reject_unknown_keys(const nlohmann::ordered_json& j, const std::set<std::string>& known,
                         const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument(std::string(where) + ": unknown key \"" + it.key() + "\"");
}

}  // namespace

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(c.kind);
  j["family"] = c.family;
  j["n_list"] = c.n_list;
  j["truncation"] = c.truncation;
  j["samples"] = c.samples;
  j["limit_draws"] = c.limit_draws;
  j["seed"] = c.seed;
  j["sampler"] = to_string(c.sampler);
  j["beta"] = c.beta;
  nlohmann::ordered_json m;
  m["proposal_width"] = c.mcmc.proposal_width;
  m["burn_in_sweeps"] = c.mcmc.burn_in_sweeps;
  m["thinning_sweeps"] = c.mcmc.thinning_sweeps;
  j["mcmc"] = m;
  j["index_lists"] = c.index_lists;
  j["moment_order"] = c.moment_order;
  j["schedule_m"] = c.schedule_m;
  j["delta"] = c.delta;
  j["k_tail"] = c.k_tail;
  j["ks_threshold"] = c.ks_threshold;
  j["threads"] = c.threads;
  j["keep_values"] = c.keep_values;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::ordered_json& j) {
  static const std::set<std::string> known = {
      "kind",       "family",       "n_list",     "truncation", "samples",
      "limit_draws", "seed",        "sampler",    "beta",       "mcmc",
      "index_lists", "moment_order", "schedule_m", "delta",     "k_tail",
      "ks_threshold", "threads",   "keep_values"};
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  reject_unknown_keys(j, known, "config");

  ExperimentConfig c;
  if (!j.contains("kind")) throw std::invalid_argument("config: missing \"kind\"");
  c.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("family")) c.family = j.at("family").get<std::string>();
  if (j.contains("n_list")) c.n_list = j.at("n_list").get<std::vector<std::int64_t>>();
  if (j.contains("truncation")) c.truncation = j.at("truncation").get<std::int64_t>();
  if (j.contains("samples")) c.samples = j.at("samples").get<std::int64_t>();
  if (j.contains("limit_draws")) c.limit_draws = j.at("limit_draws").get<std::int64_t>();
  if (j.contains("seed")) {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.seed_set = true;
  }
  if (j.contains("sampler"))
    c.sampler = sampler_choice_from_string(j.at("sampler").get<std::string>());
  if (j.contains("beta")) c.beta = j.at("beta").get<double>();
  if (j.contains("mcmc")) {
    const auto& m = j.at("mcmc");
    if (!m.is_object()) throw std::invalid_argument("config: \"mcmc\" must be an object");
    reject_unknown_keys(m, {"proposal_width", "burn_in_sweeps", "thinning_sweeps"}, "config.mcmc");
    if (m.contains("proposal_width"))
      c.mcmc.proposal_width = m.at("proposal_width").get<double>();
    if (m.contains("burn_in_sweeps"))
      c.mcmc.burn_in_sweeps = m.at("burn_in_sweeps").get<std::int64_t>();
    if (m.contains("thinning_sweeps"))
      c.mcmc.thinning_sweeps = m.at("thinning_sweeps").get<std::int64_t>();
  }
  if (j.contains("index_lists"))
    c.index_lists = j.at("index_lists").get<std::vector<std::vector<std::int64_t>>>();
  if (j.contains("moment_order")) c.moment_order = j.at("moment_order").get<int>();
  if (j.contains("schedule_m")) c.schedule_m = j.at("schedule_m").get<int>();
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  if (j.contains("k_tail")) c.k_tail = j.at("k_tail").get<std::int64_t>();
  if (j.contains("ks_threshold")) c.ks_threshold = j.at("ks_threshold").get<double>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("keep_values")) c.keep_values = j.at("keep_values").get<bool>();
  return c;
}

nlohmann::ordered_json summary_to_json(const MonteCarloSummary& summary) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(summary.config);
  auto records = nlohmann::ordered_json::array();
  for (const auto& rec : summary.per_n) {
    nlohmann::ordered_json r;
    r["n"] = rec.n;
    auto estimates = nlohmann::ordered_json::array();
    for (const auto& est : rec.estimates) {
      nlohmann::ordered_json e;
      e["name"] = est.name;
      e["value"] = json_number(est.value);
      e["std_err"] = json_number(est.std_err);
      if (est.reference) {
        e["reference"] = json_number(*est.reference);
        e["within_band"] = est.within(kSigmaBand);
      }
      estimates.push_back(std::move(e));
    }
    r["estimates"] = std::move(estimates);
    auto scalars = nlohmann::ordered_json::object();
    for (const auto& s : rec.scalars) scalars[s.name] = json_number(s.value);
    r["scalars"] = std::move(scalars);
    r["pass"] = rec.pass;
    records.push_back(std::move(r));
  }
  j["per_n"] = std::move(records);
  auto metadata = nlohmann::ordered_json::object();
  for (const auto& s : summary.metadata) metadata[s.name] = json_number(s.value);
  j["metadata"] = std::move(metadata);
  j["pass"] = summary.pass;
  return j;
}

}  // namespace cuestat
