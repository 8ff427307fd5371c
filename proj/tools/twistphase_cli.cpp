// twistphase: twist-operator expectation values and geometric phases for
// two-band lattice models.
//
//   twistphase point  model=ssh phi=0.5 dims=101
//   twistphase sweep  --config d2.cfg --workers 8 --out d2.csv
//   twistphase trend  model=free_fermion d=1 lambda=1 gamma=1 sizes=101,401,1601
//   twistphase check  [model=ssh phi=0.5 dims=50]
//   twistphase gap    model=free_fermion d=2 lambda=sweep(0,3,61) gamma=1 dims=51,51
//
// Exit codes: 0 success, 1 usage/parse error, 2 evaluation error, 3 oracle-check failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twistphase/errors.hpp"
#include "twistphase/oracle.hpp"
#include "twistphase/parallel.hpp"
#include "twistphase/sweep.hpp"

namespace tp = twistphase;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitEval = 2;
constexpr int kExitOracle = 3;

struct Args {
  std::string config_file;
  std::vector<std::string> inline_config;
  std::string out_file;
  std::string format;
  unsigned workers = 0;
  double threshold = -1.0;
  int twist_axis = 0;
  bool strict = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tp::ParseError("cannot open config file '" + path + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Config file text, then inline key=value tokens, then flag overrides.
tp::SweepSpec load_spec(const Args& a) {
  std::string text;
  std::string base_dir;
  if (!a.config_file.empty()) {
    text = read_file(a.config_file);
    base_dir = std::filesystem::path(a.config_file).parent_path().string();
  }
  for (const auto& tok : a.inline_config) text += "\n" + tok;
  if (!a.format.empty()) text += "\nformat=" + a.format;
  if (a.threshold > 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "\nthreshold=%.17g", a.threshold);
    text += buf;
  }
  if (a.twist_axis > 0) text += "\ntwist_axis=" + std::to_string(a.twist_axis);
  return tp::parse_config(text, base_dir);
}

tp::RunOptions run_options(const Args& a) {
  tp::RunOptions o;
  o.workers = a.workers ? a.workers : tp::default_workers();
  o.strict = a.strict;
  return o;
}

void write_output(const Args& a, const std::string& data) {
  if (a.out_file.empty()) {
    std::cout << data;
    return;
  }
  std::ofstream out(a.out_file, std::ios::binary);
  if (!out) throw tp::Error("cannot write '" + a.out_file + "'");
  out << data;
}

int cmd_table(const Args& a, const std::string& which) {
  auto spec = load_spec(a);
  auto opt = run_options(a);
  tp::ResultTable table;
  if (which == "point") {
    table = tp::run_point(spec, opt);
  } else if (which == "sweep") {
    if (!spec.sweep) throw tp::ParseError("sweep needs one parameter given as sweep(start,stop,count)", 0);
    table = tp::run_sweep(spec, opt);
  } else {
    if (spec.sizes.empty()) throw tp::ParseError("trend needs sizes=L1,L2,L3[,...]", 0);
    table = tp::finite_size_trend(spec, opt);
  }
  write_output(a, tp::emit(table, spec.format));
  if (which == "sweep")
    for (const auto& t : tp::detect_transitions(table))
      std::fprintf(stderr, "transition: %s at %s = %.6g\n", tp::to_string(t.kind).c_str(), table.param_name.c_str(),
                   t.value);
  return 0;
}

int cmd_gap(const Args& a) {
  auto spec = load_spec(a);
  write_output(a, tp::emit_gaps(tp::gap_scan(spec, run_options(a)), spec.format));
  return 0;
}

struct CheckLog {
  int failures = 0;
  void line(bool ok, const std::string& name, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "ok" : "FAIL", name.c_str(), detail.c_str());
    if (!ok) ++failures;
  }
  void info(const std::string& name, const std::string& detail) {
    std::printf("[info] %s: %s\n", name.c_str(), detail.c_str());
  }
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

void print_report(CheckLog& log, const std::string& label, const tp::ComparisonReport& rep) {
  for (const auto& v : rep.verdicts) {
    log.info(label + " " + tp::to_string(v.pair),
             "max deviation " + num(v.max_deviation) + (v.flagged ? " (flagged, " + std::to_string(v.flagged_rows) + " rows)" : ""));
  }
  if (rep.derived_coupling_deviation)
    log.info(label + " derived-coupling", "max factor deviation " + num(*rep.derived_coupling_deviation));
  if (rep.determinant)
    log.info(label + " determinant",
             "n_cells " + std::to_string(rep.determinant->n_cells) + ", ||z_det| - |z_closed|| " +
                 num(rep.determinant->abs_deviation) + ", phase deviation (mod conjugation) " +
                 num(rep.determinant->phase_deviation_up_to_conjugation));
}

int cmd_check(const Args& a) {
  CheckLog log;

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> logn(std::log(2.0), std::log(1e6));
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    tp::ModeCouplings c{tp::cplx(0.0, u(rng)), std::polar(std::abs(u(rng)), u(rng))};
    long n = static_cast<long>(std::llround(std::exp(logn(rng))));
    worst = std::max(worst, std::abs(tp::mode_factor(c, n).value - tp::exp_factor_oracle(c, n)));
  }
  log.line(worst <= 1e-12, "canonical factor vs matrix exponential", "1000 samples, max deviation " + num(worst));

  auto ledger = tp::compare_couplings({tp::cplx(0.0, 0.5), tp::cplx(0.0, 0.0)}, 4);
  log.info("expanded per-mode bracket at K'=i/2, K=0, N=4",
           "deviates from the exponential by " + num(ledger.rows.front().max_deviation));

  double worst21 = 0.0;
  for (double phi : {-0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.0, -1.0}) {
    auto rep = tp::compare_variants(tp::ModelSpec::ssh(phi), tp::MomentumGrid({201}));
    for (const auto& v : rep.verdicts)
      if (v.pair == tp::VariantPair::CanonicalModel) worst21 = std::max(worst21, v.max_deviation);
  }
  log.line(worst21 <= 1e-12, "SSH canonical vs specialized product", "max deviation " + num(worst21));

  const tp::KPoint k = tp::KPoint::continuous(std::vector<double>{1.0});
  auto fd = tp::fd_couplings(tp::ModelSpec::ssh(0.5), k, 0);
  double fd_dev = std::abs(fd.kprime - tp::ssh_Kprime(k, {0.5}));
  log.line(fd_dev <= 1e-6, "finite-difference K' (SSH phi=0.5, k=1)", "deviation " + num(fd_dev));

  for (int n : {4, 10, 100}) {
    auto d = tp::compare_determinant(0.5, n);
    log.info("SSH determinant phi=0.5 n_cells=" + std::to_string(n),
             "||z_det| - |z_closed|| " + num(d.abs_deviation) + ", phase deviation (mod conjugation) " +
                 num(d.phase_deviation_up_to_conjugation));
  }

  if (!a.config_file.empty() || !a.inline_config.empty()) {
    auto spec = load_spec(a);
    tp::ComparisonOptions co;
    co.twist_axis = spec.twist_axis;
    co.n_convention = spec.n_convention;
    co.include_determinant = true;
    auto rep = tp::compare_variants(spec.model, tp::MomentumGrid(spec.dims), co);
    print_report(log, spec.model.name(), rep);
    bool oracle_ok = !rep.flagged(tp::VariantPair::CanonicalOracle);
    log.line(oracle_ok, spec.model.name() + " canonical vs oracle", "max deviation " + num(rep.verdicts.front().max_deviation));
  }
  return log.failures ? kExitOracle : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twist-operator expectation values and geometric phases for two-band models"};
  app.require_subcommand(1);
  Args a;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("settings", a.inline_config, "inline key=value config tokens");
    sub->add_option("--config", a.config_file, "config file")->check(CLI::ExistingFile);
    sub->add_option("--out", a.out_file, "output file (default stdout)");
    sub->add_option("--format", a.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    sub->add_option("--workers", a.workers, "worker threads (default: hardware concurrency)")->check(CLI::PositiveNumber);
    sub->add_option("--threshold", a.threshold, "|z| below which gamma_g is ill-defined")->check(CLI::PositiveNumber);
    sub->add_option("--twist-axis", a.twist_axis, "twist axis 1..D")->check(CLI::Range(1, 3));
    sub->add_flag("--strict", a.strict, "treat singular modes as errors");
  };
  auto* point = app.add_subcommand("point", "evaluate z at a single parameter point");
  auto* sweep = app.add_subcommand("sweep", "scan one model parameter");
  auto* trend = app.add_subcommand("trend", "finite-size trend over sizes=...");
  auto* check = app.add_subcommand("check", "run the oracle suite (and compare variants for a given model)");
  auto* gap = app.add_subcommand("gap", "minimum band gap over the grid");
  for (auto* s : {point, sweep, trend, check, gap}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*point) return cmd_table(a, "point");
    if (*sweep) return cmd_table(a, "sweep");
    if (*trend) return cmd_table(a, "trend");
    if (*gap) return cmd_gap(a);
    if (*check) return cmd_check(a);
  } catch (const tp::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const tp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitEval;
  }
  return kExitUsage;
}
