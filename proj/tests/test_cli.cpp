#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/stat.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

const char* cli_path() {
  const char* p = std::getenv("CUESTAT_CLI");
  REQUIRE_MESSAGE(p != nullptr, "CUESTAT_CLI must point at the cuestat binary");
  return p;
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const std::string capture = "/tmp/cuestat_cli_out_" + std::to_string(counter++) + ".txt";
  const std::string cmd =
      env + (env.empty() ? "" : " ") + "\"" + cli_path() + "\" " + args + " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.output = buf.str();
  std::remove(capture.c_str());
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "cannot read ", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// True when some "name = value" line of the table output matches, however
// the name is padded.
bool has_kv(const std::string& out, const std::string& name, const std::string& value) {
  std::istringstream lines(out);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = line.substr(0, eq);
    std::string v = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
    };
    trim(k);
    trim(v);
    if (k == name && v == value) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("help output enumerates every subcommand and flag") {
  const auto top = run_cli("--help");
  CHECK(top.exit_code == 0);
  for (const char* sub : {"sample", "exact", "experiment", "lemma", "limit", "karamata"})
    CHECK_MESSAGE(contains(top.output, sub), "missing subcommand ", sub);

  const struct {
    const char* sub;
    std::vector<const char*> flags;
  } expected[] = {
      {"sample",
       {"--n", "--count", "--seed", "--sampler", "--beta", "--mcmc-width", "--mcmc-burnin",
        "--mcmc-thinning", "--outdir", "--out"}},
      {"exact", {"--fhat", "--n", "--trunc", "--k-tail", "--what", "--indices"}},
      {"experiment",
       {"--config", "--kind", "--fhat", "--n-list", "--trunc", "--samples", "--draws", "--seed",
        "--sampler", "--beta", "--mcmc-width", "--mcmc-burnin", "--mcmc-thinning", "--indices",
        "--moment-order", "--schedule-m", "--delta", "--k-tail", "--ks-threshold", "--threads",
        "--outdir", "--out-json", "--out-csv", "--dump-values"}},
      {"lemma", {"--fhat", "--n-list", "--j-list", "--k-tail", "--outdir", "--out"}},
      {"limit", {"--fhat", "--trunc", "--draws", "--seed", "--outdir", "--out"}},
      {"karamata", {"--fhat", "--n-list", "--lambda", "--outdir", "--out"}},
  };
  for (const auto& e : expected) {
    const auto h = run_cli(std::string(e.sub) + " --help");
    CHECK(h.exit_code == 0);
    for (const char* flag : e.flags)
      CHECK_MESSAGE(contains(h.output, flag), e.sub, " help is missing ", flag);
  }
}

TEST_CASE("bad invocations exit 1") {
  CHECK(run_cli("bogus-subcommand").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);  // a subcommand is required
  CHECK(run_cli("sample --n 4").exit_code == 1);  // --seed is required
  CHECK(run_cli("exact --fhat bogus:1 --n 8 --what vn").exit_code == 1);
  const auto noseed = run_cli("experiment --kind variance-check --fhat coslist:1 --n-list 8");
  CHECK(noseed.exit_code == 1);
  CHECK(contains(noseed.output, "seed"));
}

TEST_CASE("sample subcommand writes reproducible seeded CSV") {
  const std::string out = "/tmp/cuestat_cli_sample.csv";
  const auto r1 = run_cli("sample --n 8 --count 3 --seed 9 --out " + out);
  CHECK(r1.exit_code == 0);
  const auto first = slurp(out);
  CHECK(contains(first, "# cuestat sample"));
  CHECK(contains(first, "# config: {"));
  CHECK(contains(first, "\"seed\":9"));
  CHECK(contains(first, "# seed: 9"));
  CHECK(contains(first, "sample,index,angle"));

  const auto r2 = run_cli("sample --n 8 --count 3 --seed 9 --out " + out);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(out) == first);

  // 3 configurations x 8 angles = 24 data rows.
  int rows = 0;
  std::istringstream lines(first);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#' && line.find("sample,") != 0) ++rows;
  CHECK(rows == 24);

  // Default name lands in CUESTAT_OUTDIR.
  const std::string dir = "/tmp/cuestat_cli_outdir";
  mkdir(dir.c_str(), 0755);
  const auto r3 = run_cli("sample --n 4 --count 1 --seed 11", "CUESTAT_OUTDIR=" + dir);
  CHECK(r3.exit_code == 0);
  CHECK(slurp(dir + "/sample_n4_seed11.csv").size() > 0);
}

TEST_CASE("exact subcommand prints closed-form tables") {
  const auto var = run_cli("exact --fhat coslist:1 --n 8 --what variance");
  CHECK(var.exit_code == 0);
  CHECK(has_kv(var.output, "term1", "1"));
  CHECK(has_kv(var.output, "total", "1"));
  CHECK(has_kv(var.output, "tail_bound", "0"));

  const auto vn = run_cli("exact --fhat power:1.5 --n 4 --what vn");
  CHECK(vn.exit_code == 0);
  CHECK(has_kv(vn.output, "vn", "4.16666666667"));  // 2 H_4 = 25/6

  const auto mean = run_cli("exact --fhat coslist:1 --n 8 --what expectation");
  CHECK(mean.exit_code == 0);
  CHECK(has_kv(mean.output, "expectation", "-7"));

  const auto mom = run_cli("exact --fhat coslist:1 --n 8 --what moment --indices 1,2");
  CHECK(mom.exit_code == 0);
  CHECK(has_kv(mom.output, "moment[1,2]", "2"));

  const auto kap = run_cli("exact --fhat coslist:1 --n 8 --what cumulant --indices \"1,-1;1,2,-3\"");
  CHECK(kap.exit_code == 0);
  CHECK(has_kv(kap.output, "kappa[1,-1]", "1"));
  CHECK(has_kv(kap.output, "kappa[1,2,-3]", "0"));

  CHECK(run_cli("exact --fhat coslist:1 --n 8 --what nonsense").exit_code == 1);
  // Identity range violation surfaces as a clean error.
  CHECK(run_cli("exact --fhat coslist:1 --n 4 --what moment --indices 1,2").exit_code == 1);
}

TEST_CASE("experiment subcommand: JSON, CSV, reproducibility, exit codes") {
  const std::string js = "/tmp/cuestat_cli_exp.json";
  const std::string cs = "/tmp/cuestat_cli_exp.csv";
  const std::string args = "experiment --kind variance-check --fhat coslist:1 --n-list 8 "
                           "--samples 400 --seed 3 --threads 1 --out-json " +
                           js + " --out-csv " + cs;
  const auto r1 = run_cli(args);
  CHECK(r1.exit_code == 0);
  CHECK(contains(r1.output, "PASS"));
  const auto json_text = slurp(js);
  const auto csv_text = slurp(cs);

  const auto j = nlohmann::json::parse(json_text);
  CHECK(j["config"]["seed"] == 3);
  CHECK(j["config"]["kind"] == "variance-check");
  CHECK(j["pass"] == true);
  CHECK(j["per_n"][0]["n"] == 8);
  CHECK(contains(csv_text, "# config: {\"kind\":\"variance-check\""));
  CHECK(contains(csv_text, "# seed: 3"));
  CHECK(contains(csv_text, "name,n,value,stderr,reference,ratio"));

  const auto r2 = run_cli(args);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(js) == json_text);
  CHECK(slurp(cs) == csv_text);

  // Config-file mode reproduces the flag-mode output and rejects mixing.
  const std::string cfg = "/tmp/cuestat_cli_cfg.json";
  {
    auto jc = j["config"];
    std::ofstream(cfg) << jc.dump(2) << "\n";
  }
  const auto r3 = run_cli("experiment --config " + cfg + " --out-json " + js);
  CHECK(r3.exit_code == 0);
  CHECK(slurp(js) == json_text);
  CHECK(run_cli("experiment --config " + cfg + " --kind clt").exit_code == 1);

  std::ofstream("/tmp/cuestat_cli_bad.json") << "{\"kind\":\"clt\",\"typo_key\":1}\n";
  const auto bad = run_cli("experiment --config /tmp/cuestat_cli_bad.json");
  CHECK(bad.exit_code == 1);
  CHECK(contains(bad.output, "unknown key"));

  // A failing gate exits 2 (distinct from usage errors).
  const auto gated = run_cli(
      "experiment --kind clt --fhat power:1.5 --n-list 8 --samples 300 --seed 1 "
      "--ks-threshold 0.000001");
  CHECK(gated.exit_code == 2);
  CHECK(contains(gated.output, "FAIL"));

  // Per-sample dumps carry the value series.
  const std::string dumps = "/tmp/cuestat_cli_vals.csv";
  const auto r4 = run_cli("experiment --kind variance-check --fhat coslist:1 --n-list 8 "
                          "--samples 64 --seed 3 --threads 1 --dump-values " +
                          dumps);
  CHECK(r4.exit_code == 0);
  const auto vals = slurp(dumps);
  CHECK(contains(vals, "label,n,index,value"));
  CHECK(contains(vals, "statistic,8,0,"));
}

TEST_CASE("lemma, limit, and karamata subcommands") {
  const std::string lem = "/tmp/cuestat_cli_lemma.csv";
  const auto r1 = run_cli("lemma --fhat power:1.5 --n-list 8,16 --j-list 1,2 --out " + lem);
  CHECK(r1.exit_code == 0);
  const auto lem_text = slurp(lem);
  CHECK(contains(lem_text, "a_matrix_norm"));
  CHECK(contains(lem_text, "r_hs[1]"));
  CHECK(contains(lem_text, "ratio_iii"));

  const std::string lim = "/tmp/cuestat_cli_limit.csv";
  const auto r2 = run_cli("limit --fhat power:2 --trunc 32 --draws 5000 --seed 4 --out " + lim);
  CHECK(r2.exit_code == 0);
  CHECK(contains(r2.output, "order"));
  CHECK(contains(slurp(lim), "index,value"));
  // Infinite families need an explicit cutoff.
  CHECK(run_cli("limit --fhat power:2 --draws 10 --seed 4").exit_code == 1);

  const std::string kar = "/tmp/cuestat_cli_karamata.csv";
  const auto r3 = run_cli("karamata --fhat power:1.5 --n-list 64,128 --out " + kar);
  CHECK(r3.exit_code == 0);
  const auto kar_text = slurp(kar);
  CHECK(contains(kar_text, "karamata_ratio"));
  CHECK(contains(kar_text, "v_n"));
}
