#include "heirs/experiments/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "heirs/channel/pilots.hpp"
#include "heirs/channel/realization.hpp"

namespace heirs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> names,
             const char* what) {
  for (const auto& [name, value] : names)
    if (s == name) return value;
  throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

int arch_rank(Architecture a) { return static_cast<int>(a); }

}  // namespace

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::kHeIrs: return "he-irs";
    case Architecture::kIrs: return "irs";
    case Architecture::kSirs: return "sirs";
  }
  return "?";
}

std::string to_string(CsiMode c) { return c == CsiMode::kEstimated ? "estimated" : "perfect"; }

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::kTtra: return "t_tra";
    case SweepVariable::kBsPower: return "pb";
    case SweepVariable::kPnr: return "pnr";
    case SweepVariable::kRank: return "rank";
  }
  return "?";
}

Architecture parse_architecture(const std::string& s) {
  return parse_enum<Architecture>(
      s, {{"he-irs", Architecture::kHeIrs}, {"irs", Architecture::kIrs}, {"sirs", Architecture::kSirs}},
      "architecture");
}

CsiMode parse_csi_mode(const std::string& s) {
  return parse_enum<CsiMode>(s, {{"estimated", CsiMode::kEstimated}, {"perfect", CsiMode::kPerfect}},
                             "csi mode");
}

SweepVariable parse_sweep_variable(const std::string& s) {
  return parse_enum<SweepVariable>(s,
                                   {{"t_tra", SweepVariable::kTtra},
                                    {"ttra", SweepVariable::kTtra},
                                    {"pb", SweepVariable::kBsPower},
                                    {"bs_power", SweepVariable::kBsPower},
                                    {"pnr", SweepVariable::kPnr},
                                    {"rank", SweepVariable::kRank}},
                                   "sweep variable");
}

SystemConfig architecture_config(const SystemConfig& base, Architecture a) {
  SystemConfig c = base;
  switch (a) {
    case Architecture::kHeIrs: break;
    case Architecture::kIrs: c.n_dte_y = c.n_y; break;
    case Architecture::kSirs:
      if (base.n_dte_y < 1) throw std::invalid_argument("sirs needs a non-empty DTE panel");
      c.n_y = base.n_dte_y;
      break;
  }
  c.validate();
  return c;
}

ChannelRealization restrict_to_architecture(const ChannelRealization& full, const SystemConfig& base,
                                            Architecture a) {
  std::vector<CMatrix> h;
  for (Index k = 0; k < full.users(); ++k) h.push_back(full.h(k));
  switch (a) {
    case Architecture::kHeIrs:
      return full;
    case Architecture::kIrs:
      return ChannelRealization(full.g(), std::move(h), full.n(), full.paths_g(), full.paths_h(),
                                full.tau_bi(), full.tau_iu());
    case Architecture::kSirs: {
      const Index n_dte = base.n_dte();
      for (CMatrix& m : h) m = CMatrix(m.topRows(n_dte));
      return ChannelRealization(full.g().leftCols(n_dte), std::move(h), n_dte, full.paths_g(),
                                full.paths_h(), full.tau_bi(), full.tau_iu());
    }
  }
  return full;
}

void ExperimentSpec::validate() const {
  system.validate();
  power.validate();
  if (architectures.empty()) throw std::invalid_argument("spec: no architecture");
  if (csi.empty()) throw std::invalid_argument("spec: no csi mode");
  if (grid.empty()) throw std::invalid_argument("spec: empty sweep grid");
  if (trials < 1) throw std::invalid_argument("spec: trials must be >= 1");
  if (threads < 1) throw std::invalid_argument("spec: threads must be >= 1");
  if (t_tra < 0) throw std::invalid_argument("spec: t_tra must be >= 0");
}

GridPoint apply_grid_value(const ExperimentSpec& spec, double value) {
  GridPoint p{spec.system, spec.t_tra};
  switch (spec.variable) {
    case SweepVariable::kTtra:
      if (value < 0) throw std::invalid_argument("T_tra grid values must be >= 0");
      p.t_tra = static_cast<int>(std::lround(value));
      break;
    case SweepVariable::kBsPower: p.system.bs_power = dbm_to_watt(value); break;
    case SweepVariable::kPnr: set_pnr_db(p.system, value); break;
    case SweepVariable::kRank:
      p.system.paths_g = p.system.paths_h = static_cast<int>(std::lround(value));
      break;
  }
  p.system.validate();
  return p;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TrialContext make_context(const ExperimentSpec& spec, const GridPoint& point, Architecture a) {
  TrialContext ctx;
  ctx.base = point.system;
  ctx.system = architecture_config(point.system, a);
  ctx.architecture = a;
  ctx.dictionaries = build_dictionaries(ctx.system);
  if (ctx.system.n_ste() > 0 && !spec.random_ste)
    ctx.wide_beam = wbs_mo(WideBeamSpec::from_config(ctx.system), spec.wbs).omega;
  return ctx;
}

MetricRecord run_trial(const ExperimentSpec& spec, const TrialContext& ctx, int t_tra, CsiMode csi,
                       int trial, double value, TrialDetail* detail) {
  const auto start = std::chrono::steady_clock::now();
  const SystemConfig& cfg = ctx.system;
  MetricRecord r;
  r.architecture = ctx.architecture;
  r.csi = csi;
  r.value = value;
  r.trial = trial;
  r.seed = trial_seed(spec.seed, static_cast<std::uint64_t>(trial));
  r.t_tra = t_tra;
  r.pnr_db = pnr_db(cfg);
  r.snr_db = snr_db(cfg);
  r.bs_power_dbm = watt_to_dbm(cfg.bs_power);
  r.true_rank = cfg.paths_g;
  r.est_rank = csi == CsiMode::kEstimated ? static_cast<int>(spec.estimation.rank_g) : 0;
  r.nmse_dte = kNaN;
  r.nmse_ste = kNaN;
  try {
    std::mt19937_64 drop_rng(r.seed);
    std::mt19937_64 pilot_rng(trial_seed(r.seed, 1));
    std::mt19937_64 ste_rng(trial_seed(r.seed, 2));
    const ChannelRealization ch =
        restrict_to_architecture(synthesize_channels(ctx.base, drop_rng), ctx.base, ctx.architecture);
    const Index users = ch.users();

    // STE phases in the uplink orientation of G diag(w) H.
    CVector omega(ch.n_ste());
    if (ch.n_ste() > 0) {
      if (spec.random_ste) {
        std::uniform_real_distribution<double> angle(-kPi, kPi);
        for (Index i = 0; i < omega.size(); ++i) omega(i) = std::polar(1.0, angle(ste_rng));
      } else {
        omega = ctx.wide_beam.conjugate();
      }
    }
    std::vector<CMatrix> ca_true, eq_true;
    for (Index k = 0; k < users; ++k) {
      ca_true.push_back(ch.cascaded_dte(k));
      eq_true.push_back(ch.n_ste() > 0 ? ch.h_eq_ste(k, omega) : CMatrix::Zero(ch.n_bs(), ch.n_ue()));
    }

    std::vector<CMatrix> ca_used = ca_true, eq_used = eq_true;
    if (csi == CsiMode::kEstimated) {
      const Index length = t_tra / cfg.users;
      if (length < 1) throw std::invalid_argument("T_tra leaves no pilot per user");
      std::vector<PilotBlock> blocks;
      for (int k = 0; k < cfg.users; ++k) {
        PilotBlock b = generate_pilot_block(cfg, k, length, omega, pilot_rng);
        observe(b, ch, pilot_rng);
        blocks.push_back(std::move(b));
      }
      const EstimationResult est = estimate_dsd_mo(blocks, ctx.dictionaries, spec.estimation);
      for (Index k = 0; k < users; ++k) {
        const UserEstimate& u = est.users[static_cast<std::size_t>(k)];
        if (u.aborted) throw NumericalError("estimation aborted: " + u.diagnostic);
        ca_used[k] = u.h_ca_dte;
        eq_used[k] = ch.n_ste() > 0 ? u.h_eq_ste : CMatrix::Zero(ch.n_bs(), ch.n_ue());
      }
      if (ch.n_dte() > 0) r.nmse_dte = nmse(ca_true, ca_used);
      if (ch.n_ste() > 0) r.nmse_ste = nmse(eq_true, eq_used);
    }

    const BeamformingSolution sol = wmmse_ei(ca_used, eq_used, cfg.bs_power, cfg.downlink_noise,
                                             phase_set(cfg.phase_bits), spec.wmmse);
    const EquivalentDownlink truth(ca_true, eq_true, sol.dte_phases);
    r.rates = effective_rate(truth.channels(), sol.v, cfg.downlink_noise, spec.wmmse.streams, t_tra,
                             cfg.coherence_symbols);
    r.sum_rate = std::accumulate(r.rates.begin(), r.rates.end(), 0.0);
    r.total_power = total_power(cfg.bs_power, cfg.users, sol.dte_phases, cfg.phase_bits, spec.power);
    r.energy_efficiency = r.sum_rate / r.total_power;
    if (detail) *detail = {omega, ca_true, eq_true, ca_used, eq_used, sol};
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  struct Task {
    std::size_t context;
    int t_tra;
    CsiMode csi;
    int trial;
    double value;
  };
  std::vector<TrialContext> contexts;
  std::vector<Task> tasks;
  for (double value : spec.grid) {
    const GridPoint point = apply_grid_value(spec, value);
    for (Architecture a : spec.architectures) {
      contexts.push_back(make_context(spec, point, a));
      for (CsiMode c : spec.csi)
        for (int t = 0; t < spec.trials; ++t) tasks.push_back({contexts.size() - 1, point.t_tra, c, t, value});
    }
  }

  SweepResult result;
  result.records.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      result.records[i] = run_trial(spec, contexts[t.context], t.t_tra, t.csi, t.trial, t.value);
    }
  };
  const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const MetricRecord& a, const MetricRecord& b) {
                     return std::make_tuple(arch_rank(a.architecture), static_cast<int>(a.csi), a.value, a.trial) <
                            std::make_tuple(arch_rank(b.architecture), static_cast<int>(b.csi), b.value, b.trial);
                   });
  for (const MetricRecord& r : result.records) result.failures += r.failed ? 1 : 0;
  return result;
}

void check_failure_budget(const SweepResult& result) {
  if (result.failures * 5 > static_cast<int>(result.records.size())) {
    std::string first;
    for (const MetricRecord& r : result.records)
      if (r.failed) {
        first = r.error;
        break;
      }
    throw std::runtime_error("sweep aborted: " + std::to_string(result.failures) + " of " +
                             std::to_string(result.records.size()) + " trials failed (" + first + ")");
  }
}

namespace {

double field_of(const MetricRecord& r, Field f) {
  switch (f) {
    case Field::kSumRate: return r.sum_rate;
    case Field::kNmseDte: return r.nmse_dte;
    case Field::kNmseSte: return r.nmse_ste;
    case Field::kEnergyEfficiency: return r.energy_efficiency;
  }
  return kNaN;
}

}  // namespace

std::vector<CurvePoint> curve(const std::vector<MetricRecord>& records, Architecture a, CsiMode c,
                              Field field) {
  std::map<double, std::vector<double>> groups;
  for (const MetricRecord& r : records) {
    if (r.failed || r.architecture != a || r.csi != c) continue;
    const double v = field_of(r, field);
    if (std::isnan(v)) continue;
    groups[r.value].push_back(v);
  }
  std::vector<CurvePoint> out;
  for (const auto& [x, v] : groups)
    out.push_back({x, mean_of(v), median_of(v), static_cast<int>(v.size())});
  return out;
}

double best_ttra(const std::vector<CurvePoint>& curve) {
  if (curve.empty()) throw std::invalid_argument("best_ttra: empty sweep");
  const CurvePoint* best = nullptr;
  for (const CurvePoint& p : curve) {
    if (!best || p.mean > best->mean || (p.mean == best->mean && p.value < best->value)) best = &p;
  }
  return best->value;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << "\r\n";
}

void write_records_csv(std::ostream& out, const std::vector<MetricRecord>& records) {
  write_csv_row(out, {"architecture", "csi", "value", "trial", "seed", "t_tra", "pnr_db", "snr_db",
                      "bs_power_dbm", "true_rank", "est_rank", "nmse_dte", "nmse_ste", "sum_rate",
                      "user_rates", "total_power_w", "energy_efficiency", "failed", "error"});
  for (const MetricRecord& r : records) {
    std::string rates;
    for (std::size_t i = 0; i < r.rates.size(); ++i) rates += (i ? ";" : "") + csv_number(r.rates[i]);
    write_csv_row(out, {to_string(r.architecture), to_string(r.csi), csv_number(r.value),
                        std::to_string(r.trial), std::to_string(r.seed), std::to_string(r.t_tra),
                        csv_number(r.pnr_db), csv_number(r.snr_db), csv_number(r.bs_power_dbm),
                        std::to_string(r.true_rank), std::to_string(r.est_rank), csv_number(r.nmse_dte),
                        csv_number(r.nmse_ste), r.failed ? "" : csv_number(r.sum_rate), rates,
                        r.failed ? "" : csv_number(r.total_power),
                        r.failed ? "" : csv_number(r.energy_efficiency), r.failed ? "1" : "0", r.error});
  }
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void write_records_csv(const std::string& path, const std::vector<MetricRecord>& records) {
  std::ofstream out = open_output(path);
  write_records_csv(out, records);
  check_written(out, path);
}

PlotKind parse_plot_kind(const std::string& s) {
  return parse_enum<PlotKind>(s,
                              {{"nmse_vs_t", PlotKind::kNmseVsT},
                               {"rate_vs_t", PlotKind::kRateVsT},
                               {"rate_vs_pb", PlotKind::kRateVsPb},
                               {"ee_cdf", PlotKind::kEeCdf},
                               {"nmse_vs_rank", PlotKind::kNmseVsRank}},
                              "plot kind");
}

std::string to_string(PlotKind k) {
  switch (k) {
    case PlotKind::kNmseVsT: return "nmse_vs_t";
    case PlotKind::kRateVsT: return "rate_vs_t";
    case PlotKind::kRateVsPb: return "rate_vs_pb";
    case PlotKind::kEeCdf: return "ee_cdf";
    case PlotKind::kNmseVsRank: return "nmse_vs_rank";
  }
  return "?";
}

void emit_plotdata(std::ostream& out, const std::vector<MetricRecord>& records, PlotKind kind) {
  using Key = std::tuple<int, int, double, int>;  // architecture, csi, x, est_rank
  std::map<Key, std::vector<const MetricRecord*>> groups;
  for (const MetricRecord& r : records) {
    if (r.failed) continue;
    double x = 0.0;
    int extra = 0;
    switch (kind) {
      case PlotKind::kNmseVsT:
      case PlotKind::kRateVsT: x = r.t_tra; break;
      case PlotKind::kRateVsPb: x = r.bs_power_dbm; break;
      case PlotKind::kNmseVsRank:
        x = r.true_rank;
        extra = r.est_rank;
        break;
      case PlotKind::kEeCdf: break;
    }
    groups[{arch_rank(r.architecture), static_cast<int>(r.csi), x, extra}].push_back(&r);
  }
  auto collect = [](const std::vector<const MetricRecord*>& g, double MetricRecord::*f) {
    std::vector<double> v;
    for (const MetricRecord* r : g)
      if (!std::isnan(r->*f)) v.push_back(r->*f);
    return v;
  };

  switch (kind) {
    case PlotKind::kNmseVsT:
    case PlotKind::kNmseVsRank: {
      const bool rank = kind == PlotKind::kNmseVsRank;
      if (rank)
        write_csv_row(out, {"architecture", "true_rank", "est_rank", "nmse_dte_mean", "nmse_dte_median",
                            "nmse_ste_mean", "nmse_ste_median", "trials"});
      else
        write_csv_row(out, {"architecture", "t_tra", "nmse_dte_mean", "nmse_dte_median", "nmse_ste_mean",
                            "nmse_ste_median", "trials"});
      for (const auto& [key, g] : groups) {
        if (std::get<1>(key) != static_cast<int>(CsiMode::kEstimated)) continue;
        const auto d = collect(g, &MetricRecord::nmse_dte);
        const auto s = collect(g, &MetricRecord::nmse_ste);
        std::vector<std::string> row{to_string(static_cast<Architecture>(std::get<0>(key))),
                                     csv_number(std::get<2>(key))};
        if (rank) row.push_back(std::to_string(std::get<3>(key)));
        for (const std::string& f : {csv_number(mean_of(d)), csv_number(median_of(d)), csv_number(mean_of(s)),
                                     csv_number(median_of(s)), std::to_string(g.size())})
          row.push_back(f);
        write_csv_row(out, row);
      }
      break;
    }
    case PlotKind::kRateVsT:
    case PlotKind::kRateVsPb:
      write_csv_row(out, {"architecture", "csi", kind == PlotKind::kRateVsT ? "t_tra" : "bs_power_dbm",
                          "sum_rate_mean", "sum_rate_median", "trials"});
      for (const auto& [key, g] : groups) {
        const auto v = collect(g, &MetricRecord::sum_rate);
        write_csv_row(out, {to_string(static_cast<Architecture>(std::get<0>(key))),
                            to_string(static_cast<CsiMode>(std::get<1>(key))), csv_number(std::get<2>(key)),
                            csv_number(mean_of(v)), csv_number(median_of(v)), std::to_string(g.size())});
      }
      break;
    case PlotKind::kEeCdf:
      write_csv_row(out, {"architecture", "csi", "energy_efficiency", "fraction"});
      for (const auto& [key, g] : groups) {
        auto v = collect(g, &MetricRecord::energy_efficiency);
        std::sort(v.begin(), v.end());
        for (std::size_t i = 0; i < v.size(); ++i)
          write_csv_row(out, {to_string(static_cast<Architecture>(std::get<0>(key))),
                              to_string(static_cast<CsiMode>(std::get<1>(key))), csv_number(v[i]),
                              csv_number(static_cast<double>(i + 1) / static_cast<double>(v.size()))});
      }
      break;
  }
}

void emit_plotdata(const std::string& path, const std::vector<MetricRecord>& records, PlotKind kind) {
  std::ofstream out = open_output(path);
  emit_plotdata(out, records, kind);
  check_written(out, path);
}

}  // namespace heirs
