// Command-line front end: seeded ensemble dumps, exact-formula queries,
// Monte Carlo experiments, lemma diagnostics, limit-law tables, and
// variance-scale sweeps.  Exit codes: 0 success, 1 usage/runtime error,
// 2 experiment flagged FAIL.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cuestat/estimators.hpp"
#include "cuestat/exact_theory.hpp"
#include "cuestat/limit_laws.hpp"
#include "cuestat/montecarlo.hpp"
#include "cuestat/pair_statistics.hpp"
#include "cuestat/samplers.hpp"
#include "cuestat/test_function.hpp"

namespace {

using nlohmann::ordered_json;
using namespace cuestat;

std::string g17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string g12(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Default output directory: --outdir flag, else $CUESTAT_OUTDIR, else ".".
std::string resolve_outdir(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("CUESTAT_OUTDIR");
  if (env != nullptr && *env != '\0') return env;
  return ".";
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '-';
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

struct SeriesRow {
  std::string name;
  std::int64_t n = 0;
  double value = 0.0;
  std::optional<double> std_err;
  std::optional<double> reference;
};

// Long-form series CSV: one row per (name, n); empty cells where a column
// does not apply.  ratio = value / reference.
void write_series_csv(const std::string& path, const std::vector<std::string>& comments,
                      const std::vector<SeriesRow>& rows) {
  auto out = open_output(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "name,n,value,stderr,reference,ratio\n";
  for (const auto& r : rows) {
    out << r.name << ',' << r.n << ',' << g17(r.value) << ',';
    if (r.std_err) out << g17(*r.std_err);
    out << ',';
    if (r.reference) out << g17(*r.reference);
    out << ',';
    if (r.reference && *r.reference != 0.0) out << g17(r.value / *r.reference);
    out << '\n';
  }
}

std::vector<SeriesRow> summary_rows(const MonteCarloSummary& summary) {
  std::vector<SeriesRow> rows;
  for (const auto& rec : summary.per_n) {
    for (const auto& est : rec.estimates)
      rows.push_back({est.name, rec.n, est.value, est.std_err, est.reference});
    for (const auto& s : rec.scalars)
      rows.push_back({s.name, rec.n, s.value, std::nullopt, std::nullopt});
  }
  return rows;
}

void print_summary(const MonteCarloSummary& summary) {
  for (const auto& rec : summary.per_n) {
    std::printf("N = %lld\n", static_cast<long long>(rec.n));
    for (const auto& est : rec.estimates) {
      std::printf("  %-22s %14s  +- %-12s", est.name.c_str(), g12(est.value).c_str(),
                  g12(est.std_err).c_str());
      if (est.reference)
        std::printf("  ref %14s  %s", g12(*est.reference).c_str(),
                    est.within(4.0) ? "ok" : "OFF");
      std::printf("\n");
    }
    for (const auto& s : rec.scalars)
      std::printf("  %-22s %14s\n", s.name.c_str(), g12(s.value).c_str());
    std::printf("  %s\n", rec.pass ? "pass" : "FAIL");
  }
  for (const auto& s : summary.metadata)
    std::printf("%-24s %14s\n", s.name.c_str(), g12(s.value).c_str());
  std::printf("%s  (%.2f s)\n", summary.pass ? "PASS" : "FAIL", summary.runtime_seconds);
}

std::vector<std::vector<std::int64_t>> parse_index_lists(const std::string& text) {
  std::vector<std::vector<std::int64_t>> lists;
  if (text.empty()) return lists;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t stop = std::min(text.find(';', start), text.size());
    std::vector<std::int64_t> tuple;
    std::size_t pos = start;
    while (pos < stop) {
      const std::size_t comma = std::min(text.find(',', pos), stop);
      const std::string item = text.substr(pos, comma - pos);
      try {
        std::size_t used = 0;
        tuple.push_back(std::stoll(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad index \"" + item + "\" in --indices");
      }
      pos = comma + 1;
    }
    if (tuple.empty()) throw std::invalid_argument("empty tuple in --indices");
    lists.push_back(std::move(tuple));
    if (stop == text.size()) break;
    start = stop + 1;
  }
  return lists;
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
  std::int64_t n = 0;
  std::int64_t count = 1;
  std::uint64_t seed = 0;
  std::string sampler = "dpp";
  double beta = 2.0;
  McmcParams mcmc;
  std::string outdir;
  std::string out;
};

int run_sample_cmd(const SampleArgs& args) {
  const SamplerChoice choice = sampler_choice_from_string(args.sampler);
  if (choice == SamplerChoice::kDpp && args.beta != 2.0)
    throw std::invalid_argument("sample: the dpp sampler is exact only at beta = 2");
  McmcParams mcmc = args.mcmc;
  if (choice == SamplerChoice::kMcmc && mcmc.thinning_sweeps <= 0)
    mcmc.thinning_sweeps = resolve_thinning(args.n, args.beta, mcmc, args.seed);

  ordered_json echo;
  echo["n"] = args.n;
  echo["count"] = args.count;
  echo["seed"] = args.seed;
  echo["sampler"] = args.sampler;
  echo["beta"] = args.beta;
  ordered_json m;
  m["proposal_width"] = mcmc.proposal_width;
  m["burn_in_sweeps"] = mcmc.burn_in_sweeps;
  m["thinning_sweeps"] = mcmc.thinning_sweeps;
  echo["mcmc"] = m;

  const std::string path =
      args.out.empty()
          ? join_path(resolve_outdir(args.outdir),
                      "sample_n" + std::to_string(args.n) + "_seed" + std::to_string(args.seed) +
                          ".csv")
          : args.out;
  auto out = open_output(path);
  out << "# cuestat sample\n";
  out << "# config: " << echo.dump() << "\n";
  out << "# seed: " << args.seed << "\n";
  out << "sample,index,angle\n";
  for (std::int64_t i = 0; i < args.count; ++i) {
    RandomStream stream(args.seed, static_cast<std::uint64_t>(i));
    const EigenvalueSample s = choice == SamplerChoice::kDpp
                                   ? sample_cue(args.n, stream)
                                   : sample_cbe_mcmc(args.n, args.beta, mcmc, stream);
    for (std::size_t j = 0; j < s.angles.size(); ++j)
      out << i << ',' << j << ',' << g17(s.angles[j]) << '\n';
  }
  std::printf("wrote %s (%lld configurations, N = %lld)\n", path.c_str(),
              static_cast<long long>(args.count), static_cast<long long>(args.n));
  return 0;
}

// ---- exact -----------------------------------------------------------------

struct ExactArgs {
  std::string fhat = "power:1.5";
  std::int64_t n = 0;
  std::int64_t trunc = 0;
  std::int64_t k_tail = 0;
  std::string what;
  std::string indices;
};

int run_exact_cmd(const ExactArgs& args) {
  const TestFunction f = TestFunction::parse(args.fhat);
  if (args.what == "variance") {
    VarianceOptions opts;
    opts.k_tail = args.k_tail;
    if (args.trunc > 0) opts.coeff_cutoff = args.trunc;
    const VarianceBreakdown vb = variance_exact(f, args.n, opts);
    std::printf("term1      = %s\n", g12(vb.term1).c_str());
    std::printf("term2      = %s\n", g12(vb.term2).c_str());
    std::printf("term3      = %s\n", g12(vb.term3).c_str());
    std::printf("term4      = %s\n", g12(vb.term4).c_str());
    std::printf("total      = %s\n", g12(vb.total).c_str());
    std::printf("tail_bound = %s\n", g12(vb.tail_bound).c_str());
  } else if (args.what == "expectation") {
    const std::int64_t k = args.trunc > 0 ? args.trunc : args.n;
    std::printf("expectation = %s\n",
                g12(expected_pair_statistic(f, args.n, k)).c_str());
  } else if (args.what == "vn") {
    std::printf("vn = %s\n", g12(v_n(f, args.n)).c_str());
  } else if (args.what == "moment") {
    const auto lists = parse_index_lists(args.indices);
    if (lists.empty()) throw std::invalid_argument("exact --what moment needs --indices");
    for (const auto& ks : lists) {
      std::string label = "moment[";
      for (std::size_t i = 0; i < ks.size(); ++i)
        label += (i ? "," : "") + std::to_string(ks[i]);
      label += "]";
      std::printf("%s = %s\n", label.c_str(), g12(moment_identity_rhs(ks, args.n)).c_str());
    }
  } else if (args.what == "cumulant") {
    const auto lists = parse_index_lists(args.indices);
    if (lists.empty()) throw std::invalid_argument("exact --what cumulant needs --indices");
    for (const auto& ks : lists) {
      std::string label = "kappa[";
      for (std::size_t i = 0; i < ks.size(); ++i)
        label += (i ? "," : "") + std::to_string(ks[i]);
      label += "]";
      const auto value = joint_cumulant_exact(ks, args.n);
      if (value)
        std::printf("%s = %s\n", label.c_str(), g12(*value).c_str());
      else
        std::printf("%s = undetermined\n", label.c_str());
    }
  } else {
    throw std::invalid_argument("exact: unknown --what \"" + args.what + "\"");
  }
  return 0;
}

// ---- experiment ------------------------------------------------------------

struct ExperimentArgs {
  std::string config_path;
  std::string kind;
  std::string fhat = "power:1.5";
  std::vector<std::int64_t> n_list;
  std::int64_t trunc = 0;
  std::int64_t samples = 10000;
  std::int64_t draws = 100000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string sampler = "dpp";
  double beta = 2.0;
  McmcParams mcmc;
  std::string indices;
  int moment_order = 3;
  int schedule_m = 0;
  double delta = 0.05;
  std::int64_t k_tail = 0;
  double ks_threshold = 0.0;
  int threads = 0;
  std::string outdir;
  std::string out_json;
  std::string out_csv;
  std::string dump_values;
};

ExperimentConfig experiment_config(const ExperimentArgs& args) {
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw std::invalid_argument("cannot read config " + args.config_path);
    ordered_json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config " + args.config_path + ": " + e.what());
    }
    ExperimentConfig config = config_from_json(j);
    if (!args.dump_values.empty()) config.keep_values = true;
    return config;
  }
  if (args.kind.empty())
    throw std::invalid_argument("experiment: --kind (or --config) is required");
  ExperimentConfig config;
  config.kind = experiment_kind_from_string(args.kind);
  config.family = args.fhat;
  config.n_list = args.n_list;
  config.truncation = args.trunc;
  config.samples = args.samples;
  config.limit_draws = args.draws;
  config.seed = args.seed;
  config.seed_set = args.seed_set;
  config.sampler = sampler_choice_from_string(args.sampler);
  config.beta = args.beta;
  config.mcmc = args.mcmc;
  config.index_lists = parse_index_lists(args.indices);
  config.moment_order = args.moment_order;
  config.schedule_m = args.schedule_m;
  config.delta = args.delta;
  config.k_tail = args.k_tail;
  config.ks_threshold = args.ks_threshold;
  config.threads = args.threads;
  config.keep_values = !args.dump_values.empty();
  return config;
}

int run_experiment_cmd(const ExperimentArgs& args) {
  const ExperimentConfig config = experiment_config(args);
  const MonteCarloSummary summary = run_experiment(config);

  const std::string stem =
      "experiment_" + to_string(config.kind) + "_seed" + std::to_string(config.seed);
  const std::string outdir = resolve_outdir(args.outdir);
  const std::string json_path =
      args.out_json.empty() ? join_path(outdir, stem + ".json") : args.out_json;
  const std::string csv_path =
      args.out_csv.empty() ? join_path(outdir, stem + ".csv") : args.out_csv;

  {
    auto out = open_output(json_path);
    out << summary_to_json(summary).dump(2) << "\n";
  }
  const std::vector<std::string> comments = {
      "cuestat experiment", "config: " + config_to_json(config).dump(),
      "seed: " + std::to_string(config.seed)};
  write_series_csv(csv_path, comments, summary_rows(summary));

  if (!args.dump_values.empty()) {
    auto out = open_output(args.dump_values);
    for (const auto& c : comments) out << "# " << c << "\n";
    out << "label,n,index,value\n";
    for (const auto& series : summary.value_series)
      for (std::size_t i = 0; i < series.values.size(); ++i)
        out << series.label << ',' << series.n << ',' << i << ',' << g17(series.values[i])
            << '\n';
  }

  print_summary(summary);
  std::printf("wrote %s\nwrote %s\n", json_path.c_str(), csv_path.c_str());
  return summary.pass ? 0 : 2;
}

// ---- lemma -----------------------------------------------------------------

struct LemmaArgs {
  std::string fhat = "power:1.5";
  std::vector<std::int64_t> n_list;
  std::vector<std::int64_t> j_list;
  std::int64_t k_tail = 0;
  std::string outdir;
  std::string out;
};

int run_lemma_cmd(const LemmaArgs& args) {
  const TestFunction f = TestFunction::parse(args.fhat);
  std::vector<SeriesRow> rows;
  for (const std::int64_t n : args.n_list) {
    const Lemma21Sums sums = lemma21_sums(f, n, args.k_tail);
    const double vn = v_n(f, n);
    if (!(vn > 0.0))
      throw std::invalid_argument("lemma: variance scale V_N vanishes at N = " +
                                  std::to_string(n));
    rows.push_back({"sum_i", n, sums.sum_i, std::nullopt, std::nullopt});
    rows.push_back({"sum_ii", n, sums.sum_ii, std::nullopt, std::nullopt});
    rows.push_back({"sum_iii", n, sums.sum_iii, std::nullopt, std::nullopt});
    rows.push_back({"ratio_i", n, sums.sum_i / vn, std::nullopt, std::nullopt});
    rows.push_back({"ratio_ii", n, sums.sum_ii / vn, std::nullopt, std::nullopt});
    rows.push_back({"ratio_iii", n, sums.sum_iii / vn, std::nullopt, std::nullopt});
    rows.push_back({"v_n", n, vn, std::nullopt, std::nullopt});
    rows.push_back({"a_matrix_norm", n, a_matrix_norm(n), std::nullopt, std::nullopt});
    for (const std::int64_t j : args.j_list) {
      const ROperatorNorm r = r_operator_norm(n, j);
      rows.push_back({"r_op[" + std::to_string(j) + "]", n, r.op_norm, std::nullopt,
                      std::nullopt});
      rows.push_back({"r_hs[" + std::to_string(j) + "]", n, r.hs_norm, std::nullopt,
                      std::nullopt});
    }
  }

  ordered_json echo;
  echo["fhat"] = args.fhat;
  echo["n_list"] = args.n_list;
  echo["j_list"] = args.j_list;
  echo["k_tail"] = args.k_tail;
  const std::string path =
      args.out.empty()
          ? join_path(resolve_outdir(args.outdir), "lemma_" + sanitize(args.fhat) + ".csv")
          : args.out;
  write_series_csv(path, {"cuestat lemma", "config: " + echo.dump()}, rows);

  for (const auto& r : rows)
    if (r.name.rfind("ratio_", 0) == 0 || r.name == "a_matrix_norm")
      std::printf("%-14s N=%-8lld %s\n", r.name.c_str(), static_cast<long long>(r.n),
                  g12(r.value).c_str());
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

// ---- limit -----------------------------------------------------------------

struct LimitArgs {
  std::string fhat = "power:2";
  std::int64_t trunc = 0;
  std::int64_t draws = 100000;
  std::uint64_t seed = 0;
  std::string outdir;
  std::string out;
};

int run_limit_cmd(const LimitArgs& args) {
  const TestFunction f = TestFunction::parse(args.fhat);
  std::int64_t trunc = args.trunc;
  if (trunc <= 0) {
    if (!f.finite_support())
      throw std::invalid_argument("limit: --trunc is required for infinite families");
    trunc = f.support_end();
  }
  const std::vector<double> draws = sample_limit_law(f, trunc, args.draws, args.seed);

  std::printf("%-6s %16s %16s %12s\n", "order", "exact", "estimate", "stderr");
  for (int order = 1; order <= 4; ++order) {
    const Estimate est = empirical_cumulant(draws, order);
    const double exact = limit_law_cumulant(f, trunc, order);
    std::printf("%-6d %16s %16s %12s\n", order, g12(exact).c_str(), g12(est.value).c_str(),
                g12(est.std_err).c_str());
  }

  if (!args.out.empty()) {
    ordered_json echo;
    echo["fhat"] = args.fhat;
    echo["truncation"] = trunc;
    echo["draws"] = args.draws;
    echo["seed"] = args.seed;
    auto out = open_output(args.out);
    out << "# cuestat limit\n";
    out << "# config: " << echo.dump() << "\n";
    out << "# seed: " << args.seed << "\n";
    out << "index,value\n";
    for (std::size_t i = 0; i < draws.size(); ++i)
      out << i << ',' << g17(draws[i]) << '\n';
    std::printf("wrote %s\n", args.out.c_str());
  }
  return 0;
}

// ---- karamata --------------------------------------------------------------

struct KaramataArgs {
  std::string fhat = "power:1.5";
  std::vector<std::int64_t> n_list;
  double lambda = 2.0;
  std::string outdir;
  std::string out;
};

int run_karamata_cmd(const KaramataArgs& args) {
  const TestFunction f = TestFunction::parse(args.fhat);
  std::vector<SeriesRow> rows;
  std::printf("%-10s %16s %16s\n", "N", "v_n", "ratio");
  for (const std::int64_t n : args.n_list) {
    const double vn = v_n(f, n);
    const double ratio = karamata_ratio(f, n, args.lambda);
    rows.push_back({"v_n", n, vn, std::nullopt, std::nullopt});
    rows.push_back({"karamata_ratio", n, ratio, std::nullopt, std::nullopt});
    std::printf("%-10lld %16s %16s\n", static_cast<long long>(n), g12(vn).c_str(),
                g12(ratio).c_str());
  }

  ordered_json echo;
  echo["fhat"] = args.fhat;
  echo["n_list"] = args.n_list;
  echo["lambda"] = args.lambda;
  const std::string path =
      args.out.empty()
          ? join_path(resolve_outdir(args.outdir), "karamata_" + sanitize(args.fhat) + ".csv")
          : args.out;
  write_series_csv(path, {"cuestat karamata", "config: " + echo.dump()}, rows);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pair-counting statistics of circular ensembles: samplers, exact "
               "formulas, and Monte Carlo verification experiments"};
  app.require_subcommand(1);

  SampleArgs sample;
  auto* sub_sample = app.add_subcommand("sample", "draw and dump eigenangle configurations");
  sub_sample->add_option("--n", sample.n, "matrix size N")->required();
  sub_sample->add_option("--count", sample.count, "number of configurations (default 1)");
  sub_sample->add_option("--seed", sample.seed, "root seed")->required();
  sub_sample->add_option("--sampler", sample.sampler, "dpp | mcmc (default dpp)");
  sub_sample->add_option("--beta", sample.beta, "ensemble beta (default 2)");
  sub_sample->add_option("--mcmc-width", sample.mcmc.proposal_width,
                         "MCMC proposal width (default 2pi/N)");
  sub_sample->add_option("--mcmc-burnin", sample.mcmc.burn_in_sweeps,
                         "MCMC burn-in sweeps (default 100N)");
  sub_sample->add_option("--mcmc-thinning", sample.mcmc.thinning_sweeps,
                         "MCMC thinning sweeps (default: pilot chain)");
  sub_sample->add_option("--outdir", sample.outdir, "output directory (default $CUESTAT_OUTDIR)");
  sub_sample->add_option("--out", sample.out, "output CSV path (overrides --outdir)");

  ExactArgs exact;
  auto* sub_exact = app.add_subcommand("exact", "exact-formula queries printed as a table");
  sub_exact->add_option("--fhat", exact.fhat, "test function family spec")->required();
  sub_exact->add_option("--n", exact.n, "matrix size N")->required();
  sub_exact->add_option("--trunc", exact.trunc, "series cutoff K (0: family default)");
  sub_exact->add_option("--k-tail", exact.k_tail, "variance-formula tail cut (0: 32N)");
  sub_exact
      ->add_option("--what", exact.what,
                   "variance | expectation | vn | moment | cumulant")
      ->required();
  sub_exact->add_option("--indices", exact.indices,
                        "trace index tuples, e.g. \"1,2;1,-1\" (moment/cumulant)");

  ExperimentArgs exp;
  auto* sub_exp = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  auto* opt_config =
      sub_exp->add_option("--config", exp.config_path, "JSON config file (replaces flags)");
  auto* opt_kind = sub_exp->add_option(
      "--kind", exp.kind,
      "clt | limit-compare | variance-check | moment-identity | cumulant-check | "
      "lemma-sums | truncated-moments");
  auto* opt_fhat = sub_exp->add_option("--fhat", exp.fhat, "test function family spec");
  auto* opt_nlist =
      sub_exp->add_option("--n-list", exp.n_list, "matrix sizes, e.g. 64,128,256")
          ->delimiter(',');
  auto* opt_trunc = sub_exp->add_option("--trunc", exp.trunc, "series cutoff K (0: K = N)");
  auto* opt_samples = sub_exp->add_option("--samples", exp.samples, "Monte Carlo sample count");
  auto* opt_draws =
      sub_exp->add_option("--draws", exp.draws, "exponential-model draw count");
  auto* opt_seed = sub_exp->add_option("--seed", exp.seed, "root seed");
  auto* opt_sampler = sub_exp->add_option("--sampler", exp.sampler, "dpp | mcmc");
  auto* opt_beta = sub_exp->add_option("--beta", exp.beta, "ensemble beta (default 2)");
  auto* opt_mw = sub_exp->add_option("--mcmc-width", exp.mcmc.proposal_width,
                                     "MCMC proposal width (default 2pi/N)");
  auto* opt_mb = sub_exp->add_option("--mcmc-burnin", exp.mcmc.burn_in_sweeps,
                                     "MCMC burn-in sweeps (default 100N)");
  auto* opt_mt = sub_exp->add_option("--mcmc-thinning", exp.mcmc.thinning_sweeps,
                                     "MCMC thinning sweeps (default: pilot chain)");
  auto* opt_idx = sub_exp->add_option("--indices", exp.indices,
                                      "trace index tuples, e.g. \"1,2;1,-1\"");
  auto* opt_mo = sub_exp->add_option("--moment-order", exp.moment_order,
                                     "truncated-moments order m (default 3)");
  auto* opt_sm = sub_exp->add_option("--schedule-m", exp.schedule_m,
                                     "truncated-moments M (0: mn_schedule)");
  auto* opt_delta = sub_exp->add_option("--delta", exp.delta, "mn_schedule slack (default 0.05)");
  auto* opt_kt = sub_exp->add_option("--k-tail", exp.k_tail, "variance-formula tail cut (0: 32N)");
  auto* opt_ks = sub_exp->add_option("--ks-threshold", exp.ks_threshold,
                                     "KS pass gate (0: no gate)");
  sub_exp->add_option("--threads", exp.threads, "worker count (0: OpenMP default, 1: serial)");
  sub_exp->add_option("--outdir", exp.outdir, "output directory (default $CUESTAT_OUTDIR)");
  sub_exp->add_option("--out-json", exp.out_json, "summary JSON path");
  sub_exp->add_option("--out-csv", exp.out_csv, "summary CSV path");
  sub_exp->add_option("--dump-values", exp.dump_values, "per-sample values CSV path");
  for (auto* opt : {opt_kind, opt_fhat, opt_nlist, opt_trunc, opt_samples, opt_draws, opt_seed,
                    opt_sampler, opt_beta, opt_mw, opt_mb, opt_mt, opt_idx, opt_mo, opt_sm,
                    opt_delta, opt_kt, opt_ks})
    opt_config->excludes(opt);

  LemmaArgs lemma;
  auto* sub_lemma =
      app.add_subcommand("lemma", "off-diagonal control sums and operator norms over N");
  sub_lemma->add_option("--fhat", lemma.fhat, "test function family spec")->required();
  sub_lemma->add_option("--n-list", lemma.n_list, "matrix sizes, e.g. 64,256,1024")
      ->required()
      ->delimiter(',');
  sub_lemma->add_option("--j-list", lemma.j_list, "band indices for the block norms")
      ->delimiter(',');
  sub_lemma->add_option("--k-tail", lemma.k_tail, "tail cut for sum (iii) (0: 32N)");
  sub_lemma->add_option("--outdir", lemma.outdir, "output directory (default $CUESTAT_OUTDIR)");
  sub_lemma->add_option("--out", lemma.out, "output CSV path (overrides --outdir)");

  LimitArgs limit;
  auto* sub_limit =
      app.add_subcommand("limit", "exponential-model draws and cumulant table");
  sub_limit->add_option("--fhat", limit.fhat, "test function family spec")->required();
  sub_limit->add_option("--trunc", limit.trunc,
                        "series cutoff K (required for infinite families)");
  sub_limit->add_option("--draws", limit.draws, "draw count (default 100000)");
  sub_limit->add_option("--seed", limit.seed, "root seed")->required();
  sub_limit->add_option("--outdir", limit.outdir, "output directory (default $CUESTAT_OUTDIR)");
  sub_limit->add_option("--out", limit.out, "draws CSV path (optional)");

  KaramataArgs karamata;
  auto* sub_karamata =
      app.add_subcommand("karamata", "variance scale V_N and slow-variation ratios over N");
  sub_karamata->add_option("--fhat", karamata.fhat, "test function family spec")->required();
  sub_karamata->add_option("--n-list", karamata.n_list, "matrix sizes")
      ->required()
      ->delimiter(',');
  sub_karamata->add_option("--lambda", karamata.lambda, "ratio argument (default 2)");
  sub_karamata->add_option("--outdir", karamata.outdir,
                           "output directory (default $CUESTAT_OUTDIR)");
  sub_karamata->add_option("--out", karamata.out, "output CSV path (overrides --outdir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  exp.seed_set = opt_seed->count() > 0;

  try {
    if (*sub_sample) return run_sample_cmd(sample);
    if (*sub_exact) return run_exact_cmd(exact);
    if (*sub_exp) return run_experiment_cmd(exp);
    if (*sub_lemma) return run_lemma_cmd(lemma);
    if (*sub_limit) return run_limit_cmd(limit);
    if (*sub_karamata) return run_karamata_cmd(karamata);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
