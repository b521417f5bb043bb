// heirs: command-line front end of the HE-IRS simulator.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "heirs/experiments/config_file.hpp"
#include "heirs/experiments/harness.hpp"
#include "heirs/experiments/lemma1_demo.hpp"
#include "heirs/experiments/matrix_io.hpp"

namespace fs = std::filesystem;
using namespace heirs;

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> threads;
  std::string out;
};

ExperimentSpec load_or_default(const std::string& path, const CommonFlags& f) {
  ExperimentSpec spec = path.empty() ? ExperimentSpec{} : load_experiment(path);
  if (f.seed) spec.seed = *f.seed;
  if (f.trials) spec.trials = *f.trials;
  if (f.threads) spec.threads = *f.threads;
  spec.validate();
  return spec;
}

std::vector<PlotKind> default_plots(SweepVariable v) {
  switch (v) {
    case SweepVariable::kTtra: return {PlotKind::kRateVsT, PlotKind::kNmseVsT};
    case SweepVariable::kBsPower: return {PlotKind::kRateVsPb, PlotKind::kEeCdf};
    case SweepVariable::kRank: return {PlotKind::kNmseVsRank};
    case SweepVariable::kPnr: return {};
  }
  return {};
}

std::string fmt(double v, const char* f = "%.4g") {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cmd_run(const std::string& spec_file, const std::vector<std::string>& plots, const CommonFlags& f) {
  ExperimentSpec spec = load_or_default(spec_file, f);
  if (!f.out.empty()) spec.output = f.out;
  const SweepResult res = run_sweep(spec);
  write_records_csv(spec.output, res.records);
  std::cout << "wrote " << res.records.size() << " records to " << spec.output << " (" << res.failures
            << " failed)\n";
  check_failure_budget(res);

  std::vector<PlotKind> kinds;
  for (const std::string& p : plots) kinds.push_back(parse_plot_kind(p));
  if (plots.empty()) kinds = default_plots(spec.variable);
  const fs::path base(spec.output);
  for (PlotKind k : kinds) {
    const fs::path p = base.parent_path() / (base.stem().string() + "_" + to_string(k) + ".csv");
    emit_plotdata(p.string(), res.records, k);
    std::cout << "wrote " << p.string() << '\n';
  }

  for (Architecture a : spec.architectures) {
    for (CsiMode c : spec.csi) {
      const auto rate = curve(res.records, a, c, Field::kSumRate);
      const auto dte = curve(res.records, a, c, Field::kNmseDte);
      const auto ste = curve(res.records, a, c, Field::kNmseSte);
      const auto ee = curve(res.records, a, c, Field::kEnergyEfficiency);
      std::cout << to_string(a) << " / " << to_string(c) << '\n';
      std::cout << "  " << to_string(spec.variable) << "\tsum_rate\tnmse_dte_dB\tnmse_ste_dB\tee\n";
      for (std::size_t i = 0; i < rate.size(); ++i) {
        auto db = [&](const std::vector<CurvePoint>& cv) {
          for (const CurvePoint& p : cv)
            if (p.value == rate[i].value) return fmt(10 * std::log10(p.mean));
          return std::string("-");
        };
        std::cout << "  " << rate[i].value << '\t' << fmt(rate[i].mean) << '\t' << db(dte) << '\t' << db(ste)
                  << '\t' << fmt(i < ee.size() ? ee[i].mean : NAN) << '\n';
      }
      if (spec.variable == SweepVariable::kTtra && !rate.empty())
        std::cout << "  best T_tra: " << best_ttra(rate) << '\n';
    }
  }
  return 0;
}

struct ShotFlags {
  std::string config;
  std::string architecture = "he-irs";
  std::string csi = "estimated";
  int t_tra = -1;
};

MetricRecord single_shot(const ShotFlags& s, const CommonFlags& f, CsiMode csi, TrialDetail& detail,
                         ExperimentSpec& spec) {
  spec = load_or_default(s.config, f);
  const int t_tra = s.t_tra >= 0 ? s.t_tra : spec.t_tra;
  GridPoint point{spec.system, t_tra};
  const TrialContext ctx = make_context(spec, point, parse_architecture(s.architecture));
  MetricRecord r = run_trial(spec, ctx, t_tra, csi, 0, t_tra, &detail);
  if (r.failed) throw std::runtime_error("trial failed: " + r.error);
  return r;
}

std::string out_path(const CommonFlags& f, const std::string& name) {
  const fs::path dir = f.out.empty() ? fs::path(".") : fs::path(f.out);
  fs::create_directories(dir);
  return (dir / name).string();
}

int cmd_estimate(const ShotFlags& s, const CommonFlags& f) {
  TrialDetail d;
  ExperimentSpec spec;
  const MetricRecord r = single_shot(s, f, CsiMode::kEstimated, d, spec);
  std::vector<NamedMatrix> m;
  for (std::size_t k = 0; k < d.cascaded_true.size(); ++k) {
    const std::string u = std::to_string(k);
    m.push_back({"h_ca_dte_true_" + u, d.cascaded_true[k]});
    m.push_back({"h_ca_dte_est_" + u, d.cascaded_used[k]});
    m.push_back({"h_eq_ste_true_" + u, d.equivalent_true[k]});
    m.push_back({"h_eq_ste_est_" + u, d.equivalent_used[k]});
  }
  m.push_back({"ste_phases", d.ste_phases});
  const std::string path = out_path(f, "estimate.json");
  write_matrices(path, m);
  std::cout << "T_tra " << r.t_tra << ", PNR " << fmt(r.pnr_db) << " dB\n"
            << "NMSE_DTE,ca " << fmt(10 * std::log10(r.nmse_dte)) << " dB\n"
            << "NMSE_STE,eq " << fmt(10 * std::log10(r.nmse_ste)) << " dB\n"
            << "wrote " << path << '\n';
  return 0;
}

int cmd_beamform(const ShotFlags& s, const CommonFlags& f) {
  TrialDetail d;
  ExperimentSpec spec;
  const MetricRecord r = single_shot(s, f, parse_csi_mode(s.csi), d, spec);
  const std::string path = out_path(f, "beamform.json");
  write_matrices(path, {{"ste_phases", d.ste_phases}, {"dte_phases", d.solution.dte_phases}, {"precoder", d.solution.v}});
  std::cout << "WMMSE-EI iterations " << d.solution.iterations << '\n';
  for (std::size_t k = 0; k < r.rates.size(); ++k) std::cout << "R_" << k + 1 << " " << fmt(r.rates[k]) << '\n';
  std::cout << "sum rate " << fmt(r.sum_rate) << " bit/s/Hz, P_total " << fmt(r.total_power) << " W, EE "
            << fmt(r.energy_efficiency) << " bit/Hz/J\n";
  if (spec.system.phase_bits == 1) std::cout << "DTE bits " << phase_bit_pattern(d.solution.dte_phases) << '\n';
  std::cout << "wrote " << path << '\n';
  return 0;
}

int cmd_lemma1(const CommonFlags& f) {
  const int trials = f.trials.value_or(20);
  const auto rows = lemma1_table(trials, f.seed.value_or(1));
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + f.out);
    out = &file;
  }
  write_csv_row(*out, {"n_ste", "trials", "full_rank_trials", "rank_min", "rank_max", "columns"});
  for (int n_ste = 0; n_ste <= 3; ++n_ste) {
    int full = 0;
    Index lo = 1 << 30, hi = 0, cols = 0;
    for (const Lemma1Row& r : rows) {
      if (r.n_ste != n_ste) continue;
      full += r.full_rank();
      lo = std::min(lo, r.rank);
      hi = std::max(hi, r.rank);
      cols = r.columns;
    }
    write_csv_row(*out, {std::to_string(n_ste), std::to_string(trials), std::to_string(full), std::to_string(lo),
                         std::to_string(hi), std::to_string(cols)});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HE-IRS channel estimation and beamforming simulator"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::uint64_t seed = 0;
  int trials = 0, threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials per grid point")->check(CLI::PositiveNumber);
  auto* threads_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", flags.out, "output file (run, lemma1) or directory (estimate, beamform)");

  std::string spec_file;
  std::vector<std::string> plots;
  auto* run = app.add_subcommand("run", "run a sweep described by an INI spec file")->fallthrough();
  run->add_option("spec-file", spec_file, "experiment spec")->required()->check(CLI::ExistingFile);
  run->add_option("--plot", plots, "plot-data kinds: nmse_vs_t rate_vs_t rate_vs_pb ee_cdf nmse_vs_rank");

  ShotFlags shot;
  auto add_shot = [&](CLI::App* sub) {
    sub->add_option("--config", shot.config, "INI spec file for the scenario")->check(CLI::ExistingFile);
    sub->add_option("--arch", shot.architecture, "he-irs, irs or sirs");
    sub->add_option("--ttra", shot.t_tra, "total pilot length T_tra");
    sub->fallthrough();
  };
  auto* estimate = app.add_subcommand("estimate", "estimate one drop and dump the matrices");
  add_shot(estimate);
  auto* beamform = app.add_subcommand("beamform", "estimate and beamform one drop");
  add_shot(beamform);
  beamform->add_option("--csi", shot.csi, "estimated or perfect");
  auto* lemma1 = app.add_subcommand("lemma1", "rank of the overall cascaded measurement matrix vs N_STE")->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) flags.seed = seed;
  if (*trials_opt) flags.trials = trials;
  if (*threads_opt) flags.threads = threads;

  try {
    if (run->parsed()) return cmd_run(spec_file, plots, flags);
    if (estimate->parsed()) return cmd_estimate(shot, flags);
    if (beamform->parsed()) return cmd_beamform(shot, flags);
    if (lemma1->parsed()) return cmd_lemma1(flags);
  } catch (const std::exception& e) {
    std::cerr << "heirs: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
