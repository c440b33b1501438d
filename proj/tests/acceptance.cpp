// Release gate: ten end-to-end checks of the sampler, exact-theory, and
// Monte Carlo stack at pinned seeds and sizes (acceptance_manifest.hpp).
// Prints one PASS/FAIL line per criterion; exit status is the number of
// failures.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "cuestat/common.hpp"
#include "cuestat/estimators.hpp"
#include "cuestat/exact_theory.hpp"
#include "cuestat/limit_laws.hpp"
#include "cuestat/montecarlo.hpp"
#include "cuestat/pair_statistics.hpp"
#include "cuestat/rng.hpp"
#include "cuestat/samplers.hpp"
#include "cuestat/test_function.hpp"

#include "acceptance_manifest.hpp"

namespace {

template <class... Args>
std::string fmt(const char* spec, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), spec, args...);
  return buf;
}

const cuestat::Estimate& get_estimate(const cuestat::NSummary& rec, const std::string& name) {
  for (const auto& e : rec.estimates)
    if (e.name == name) return e;
  throw std::runtime_error("missing estimate " + name);
}

double get_scalar(const cuestat::NSummary& rec, const std::string& name) {
  for (const auto& s : rec.scalars)
    if (s.name == name) return s.value;
  throw std::runtime_error("missing scalar " + name);
}

double get_metadata(const cuestat::MonteCarloSummary& summary, const std::string& name) {
  for (const auto& s : summary.metadata)
    if (s.name == name) return s.value;
  throw std::runtime_error("missing metadata " + name);
}

double sigma_distance(const cuestat::Estimate& e) {
  return std::abs(e.value - *e.reference) / e.std_err;
}

// 1. S_N(f_K) computed from angle differences and from power-trace moduli
//    must agree to near machine precision on random configurations.
bool spectral_identity(std::string& detail) {
  double worst = 0.0;
  for (int i = 0; i < gates::kIdentityConfigs; ++i) {
    cuestat::RandomStream rs(gates::kIdentitySeed, static_cast<std::uint64_t>(i));
    std::string spec = "power:1.5";
    if (i % 2 == 1) {
      const int len = 1 + static_cast<int>(rs.uniform(8.0));
      std::ostringstream os;
      os << "coslist:";
      os.precision(17);
      for (int k = 0; k < len; ++k) {
        if (k) os << ',';
        os << 4.0 * rs.uniform() - 2.0;
      }
      spec = os.str();
    }
    const cuestat::TestFunction f = cuestat::TestFunction::parse(spec);
    std::vector<double> angles(gates::kIdentityN);
    for (double& a : angles) a = rs.uniform(cuestat::kTwoPi);
    const double direct = cuestat::pair_statistic_direct(angles, f, gates::kIdentityTrunc);
    const double spectral = cuestat::pair_statistic_spectral(angles, f, gates::kIdentityTrunc);
    worst = std::max(worst, std::abs(direct - spectral) / (1.0 + std::abs(direct)));
  }
  detail = fmt("max rel gap %.2e over %d configs, tol %.0e", worst, gates::kIdentityConfigs,
               gates::kIdentityRelTol);
  return worst <= gates::kIdentityRelTol;
}

// 2. Empirical variance of S_N(f) over exact-sampler draws matches the
//    closed-form variance for one finite and one infinite coefficient
//    sequence.
bool variance_match(std::string& detail) {
  using namespace cuestat;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kVarianceCheck;
  cfg.family = "coslist:1";
  cfg.n_list = {gates::kVarCosN};
  cfg.samples = gates::kVarCosSamples;
  cfg.seed = gates::kVarCosSeed;
  cfg.seed_set = true;
  const MonteCarloSummary cos_run = run_experiment(cfg);
  const Estimate cos_var = get_estimate(cos_run.per_n[0], "variance");

  cfg.family = "power:1.5";
  cfg.n_list = {gates::kVarPowerN};
  cfg.samples = gates::kVarPowerSamples;
  cfg.seed = gates::kVarPowerSeed;
  const MonteCarloSummary pow_run = run_experiment(cfg);
  const Estimate pow_var = get_estimate(pow_run.per_n[0], "variance");

  detail = fmt("cos N=%d: %.4f vs %.4f (%.1f se); power N=%d: %.4f vs %.4f (%.1f se); band %.0f",
               static_cast<int>(gates::kVarCosN), cos_var.value, *cos_var.reference,
               sigma_distance(cos_var), static_cast<int>(gates::kVarPowerN), pow_var.value,
               *pow_var.reference, sigma_distance(pow_var), gates::kVarSigmaBand);
  return cos_var.within(gates::kVarSigmaBand) && pow_var.within(gates::kVarSigmaBand);
}

// 3. E|t_k|^2 = min(k, N), the mixed moment E|t_1|^2 |t_2|^2 = 2, and the
//    vanishing joint cumulant kappa(t_1, t_2, t_{-3}) = 0 at N = 16.
bool trace_moments(std::string& detail) {
  using namespace cuestat;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kMomentIdentity;
  cfg.n_list = {gates::kMomentN};
  cfg.samples = gates::kMomentSamples;
  cfg.seed = gates::kMomentSeed;
  cfg.seed_set = true;
  cfg.index_lists = {{1}, {8}, {24}, {1, 2}};
  const MonteCarloSummary moments = run_experiment(cfg);
  const NSummary& mrec = moments.per_n[0];
  double worst_moment = 0.0;
  bool moments_ok = true;
  for (const char* name : {"moment[1]", "moment[8]", "moment[24]", "moment[1,2]"}) {
    const Estimate& e = get_estimate(mrec, name);
    worst_moment = std::max(worst_moment, sigma_distance(e));
    moments_ok = moments_ok && e.within(gates::kMomentSigmaBand);
  }

  cfg.kind = ExperimentKind::kCumulantCheck;
  cfg.index_lists = {{1, 2, -3}};
  const MonteCarloSummary cumulants = run_experiment(cfg);
  const Estimate& re = get_estimate(cumulants.per_n[0], "kappa[1,2,-3].re");
  const Estimate& im = get_estimate(cumulants.per_n[0], "kappa[1,2,-3].im");
  const double worst_kappa = std::max(sigma_distance(re), sigma_distance(im));
  const bool kappa_ok =
      re.within(gates::kCumulantSigmaBand) && im.within(gates::kCumulantSigmaBand);

  detail = fmt("moments off by <= %.2f se (band %.0f); kappa[1,2,-3] off by <= %.2f se (band %.0f)",
               worst_moment, gates::kMomentSigmaBand, worst_kappa, gates::kCumulantSigmaBand);
  return moments_ok && kappa_ok;
}

// 4. The normalized statistic for a slowly divergent variance scale drifts
//    toward N(0,1): KS distance non-increasing in N and under the final
//    threshold.
bool gaussian_limit(std::string& detail) {
  using namespace cuestat;
  double ks[3] = {0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::kClt;
    cfg.family = "power:1.5";
    cfg.n_list = {gates::kCltNs[i]};
    cfg.samples = gates::kCltSamples[i];
    cfg.seed = gates::kCltSeeds[i];
    cfg.seed_set = true;
    const MonteCarloSummary summary = run_experiment(cfg);
    ks[i] = get_scalar(summary.per_n[0], "ks_normal");
  }
  detail = fmt("ks to N(0,1): %.4f (N=%d), %.4f (N=%d), %.4f (N=%d); final tol %.2f",
               ks[0], static_cast<int>(gates::kCltNs[0]), ks[1],
               static_cast<int>(gates::kCltNs[1]), ks[2], static_cast<int>(gates::kCltNs[2]),
               gates::kCltFinalKs);
  return ks[0] >= ks[1] && ks[1] >= ks[2] && ks[2] < gates::kCltFinalKs;
}

// 5. For a convergent variance scale the centered statistic matches the
//    exponential-model draws and is measurably non-Gaussian: closer in KS
//    to the model than any normal fit.
bool exponential_limit(std::string& detail) {
  using namespace cuestat;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kLimitCompare;
  cfg.family = "power:2";
  cfg.n_list = {gates::kLimitN};
  cfg.samples = gates::kLimitSamples;
  cfg.limit_draws = gates::kLimitDraws;
  cfg.seed = gates::kLimitSeed;
  cfg.seed_set = true;
  cfg.ks_threshold = gates::kLimitKs;
  const MonteCarloSummary summary = run_experiment(cfg);
  const double ks_limit = get_scalar(summary.per_n[0], "ks_limit");
  const double ks_gauss = get_scalar(summary.per_n[0], "ks_normal_bestfit");
  detail = fmt("ks to model %.4f (tol %.2f), ks to best normal %.4f", ks_limit, gates::kLimitKs,
               ks_gauss);
  return summary.pass && ks_limit <= gates::kLimitKs && ks_gauss > ks_limit;
}

// 6. The three off-diagonal control sums, each divided by V_N, shrink
//    strictly along a dyadic N sweep for the slowly divergent family.
bool control_sums(std::string& detail) {
  using namespace cuestat;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kLemmaSums;
  cfg.family = "power:1.5";
  cfg.n_list.assign(std::begin(gates::kSumsNs), std::end(gates::kSumsNs));
  cfg.seed = 1;
  cfg.seed_set = true;
  const MonteCarloSummary summary = run_experiment(cfg);
  bool strict = true;
  double first[3] = {0.0, 0.0, 0.0}, last[3] = {0.0, 0.0, 0.0};
  const char* names[3] = {"ratio_i", "ratio_ii", "ratio_iii"};
  for (int s = 0; s < 3; ++s) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < summary.per_n.size(); ++i) {
      const double r = get_scalar(summary.per_n[i], names[s]);
      strict = strict && r < prev;
      prev = r;
      if (i == 0) first[s] = r;
      last[s] = r;
    }
  }
  const bool flag = get_metadata(summary, "ratios_decreasing") == 1.0;
  detail = fmt("ratios over N=%d..%d: (i) %.3f to %.3f, (ii) %.3f to %.3f, (iii) %.3f to %.3f",
               static_cast<int>(gates::kSumsNs[0]), static_cast<int>(gates::kSumsNs[4]), first[0],
               last[0], first[1], last[1], first[2], last[2]);
  return strict && flag;
}

// 7. Norm bounds for the triangular prefix matrix and its banded blocks:
//    |A_N| <= 3 and |R_{N,j}|_op <= |R_{N,j}|_HS <= 1/j.
bool operator_norms(std::string& detail) {
  using namespace cuestat;
  double worst_a = 0.0;
  for (std::int64_t n = 1; n <= gates::kANormMaxN; ++n)
    worst_a = std::max(worst_a, a_matrix_norm(n));
  double worst_hs_excess = -1.0, worst_op_excess = -1.0;
  for (std::int64_t n : gates::kRNormNs) {
    for (int j = 1; j <= gates::kRNormMaxJ; ++j) {
      const ROperatorNorm r = r_operator_norm(n, j);
      worst_hs_excess = std::max(worst_hs_excess, r.hs_norm - 1.0 / j);
      worst_op_excess = std::max(worst_op_excess, r.op_norm - r.hs_norm);
    }
  }
  detail = fmt("max |A_N| = %.6f (bound %.0f); max hs - 1/j = %.2e; max op - hs = %.2e", worst_a,
               gates::kANormBound, worst_hs_excess, worst_op_excess);
  return worst_a <= gates::kANormBound && worst_hs_excess <= 1e-12 && worst_op_excess <= 1e-12;
}

// 8. The exponential-sum MGF with flat weights converges monotonically in K
//    to the Gaussian value e^{t^2/2} on both sides of zero.
bool mgf_convergence(std::string& detail) {
  double worst_final = 0.0;
  bool monotone = true;
  for (double t : gates::kMgfTs) {
    const double target = std::exp(0.5 * t * t);
    double prev = std::numeric_limits<double>::infinity();
    double gap = 0.0;
    for (std::size_t k : gates::kMgfKs) {
      const std::vector<double> as(k, 1.0);
      gap = std::abs(cuestat::exp_sum_mgf(as, t) - target);
      monotone = monotone && gap < prev;
      prev = gap;
    }
    worst_final = std::max(worst_final, gap);
  }
  detail = fmt("gaps shrink over K=%zu..%zu for all t; worst final gap %.4f (tol %.2f)",
               gates::kMgfKs[0], gates::kMgfKs[2], worst_final, gates::kMgfFinalGap);
  return monotone && worst_final < gates::kMgfFinalGap;
}

double t1_squared(std::span<const double> angles) {
  std::complex<double> t{0.0, 0.0};
  for (double a : angles) t += std::polar(1.0, a);
  return std::norm(t);
}

// 9. The exact beta = 2 sampler and the Metropolis chain agree on the
//    |t_1|^2 distribution, and the beta = 0 chain reproduces i.i.d. uniform
//    order statistics coordinate by coordinate.
bool sampler_agreement(std::string& detail) {
  using namespace cuestat;
  std::vector<double> dpp(gates::kCrossSamples), chain(gates::kCrossSamples);
  for (std::int64_t i = 0; i < gates::kCrossSamples; ++i) {
    RandomStream rs(gates::kCrossDppSeed, static_cast<std::uint64_t>(i));
    dpp[static_cast<std::size_t>(i)] = t1_squared(sample_cue(gates::kCrossN, rs).angles);
  }
  McmcParams params;
  params.thinning_sweeps = resolve_thinning(gates::kCrossN, 2.0, params, gates::kCrossMcmcSeed);
  for (std::int64_t i = 0; i < gates::kCrossSamples; ++i) {
    RandomStream rs(gates::kCrossMcmcSeed, static_cast<std::uint64_t>(i));
    chain[static_cast<std::size_t>(i)] =
        t1_squared(sample_cbe_mcmc(gates::kCrossN, 2.0, params, rs).angles);
  }
  const double ks_beta2 = ks_distance(dpp, chain);

  const auto n0 = static_cast<std::size_t>(gates::kUniformN);
  std::vector<std::vector<double>> mc_coord(n0), ref_coord(n0);
  McmcParams flat;
  flat.thinning_sweeps = resolve_thinning(gates::kUniformN, 0.0, flat, gates::kUniformMcmcSeed);
  for (std::int64_t i = 0; i < gates::kUniformSamples; ++i) {
    RandomStream rs(gates::kUniformMcmcSeed, static_cast<std::uint64_t>(i));
    const EigenvalueSample s = sample_cbe_mcmc(gates::kUniformN, 0.0, flat, rs);
    for (std::size_t c = 0; c < n0; ++c) mc_coord[c].push_back(s.angles[c]);
  }
  std::vector<double> draw(n0);
  for (std::int64_t i = 0; i < gates::kUniformRefSamples; ++i) {
    RandomStream rs(gates::kUniformRefSeed, static_cast<std::uint64_t>(i));
    for (double& x : draw) x = rs.uniform(kTwoPi);
    std::sort(draw.begin(), draw.end());
    for (std::size_t c = 0; c < n0; ++c) ref_coord[c].push_back(draw[c]);
  }
  double worst_flat = 0.0;
  for (std::size_t c = 0; c < n0; ++c)
    worst_flat = std::max(worst_flat, ks_distance(mc_coord[c], ref_coord[c]));

  detail = fmt("beta=2 N=%d ks on |t_1|^2: %.4f (tol %.2f); beta=0 N=%d worst coordinate ks: "
               "%.4f (tol %.2f)",
               static_cast<int>(gates::kCrossN), ks_beta2, gates::kCrossKs,
               static_cast<int>(gates::kUniformN), worst_flat, gates::kUniformKs);
  return ks_beta2 < gates::kCrossKs && worst_flat < gates::kUniformKs;
}

// 10. Third central moments of the truncated trace sum and its exponential
//     model coincide within joint error bars when the moment identity is
//     exact at the forced cutoff.
bool truncated_moments(std::string& detail) {
  using namespace cuestat;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kTruncatedMoments;
  cfg.family = "power:1.5";
  cfg.n_list = {gates::kTruncN};
  cfg.moment_order = gates::kTruncOrder;
  cfg.schedule_m = gates::kTruncScheduleM;
  cfg.samples = gates::kTruncSamples;
  cfg.limit_draws = gates::kTruncDraws;
  cfg.seed = gates::kTruncSeed;
  cfg.seed_set = true;
  const MonteCarloSummary summary = run_experiment(cfg);
  const NSummary& rec = summary.per_n[0];
  const Estimate& trace = get_estimate(rec, "trace_model");
  const Estimate& model = get_estimate(rec, "exponential_model");
  const double gap = get_scalar(rec, "joint_gap");
  const double se = get_scalar(rec, "joint_se");
  const bool exact = get_scalar(rec, "identity_exact") == 1.0;
  detail = fmt("order-%d cumulant: traces %.4f, model %.4f, ref %.4f, gap %.4f vs %.0f x %.4f",
               gates::kTruncOrder, trace.value, model.value, *model.reference, gap,
               gates::kTruncSigmaBand, se);
  return summary.pass && exact && gap <= gates::kTruncSigmaBand * se;
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    bool (*check)(std::string&);
  };
  const Criterion table[] = {
      {"spectral-identity", spectral_identity}, {"variance-match", variance_match},
      {"trace-moments", trace_moments},         {"gaussian-limit", gaussian_limit},
      {"exponential-limit", exponential_limit}, {"control-sums", control_sums},
      {"operator-norms", operator_norms},       {"mgf-convergence", mgf_convergence},
      {"sampler-agreement", sampler_agreement}, {"truncated-moments", truncated_moments},
  };
  int failures = 0;
  int index = 0;
  for (const Criterion& c : table) {
    ++index;
    std::string detail;
    bool ok = false;
    try {
      ok = c.check(detail);
    } catch (const std::exception& e) {
      detail = fmt("exception: %s", e.what());
    }
    std::printf("criterion %02d %-18s %s  (%s)\n", index, c.label, ok ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures;
}
