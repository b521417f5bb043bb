#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heirs/beamforming/wide_beam.hpp"
#include "heirs/beamforming/wmmse_ei.hpp"
#include "heirs/channel/config.hpp"
#include "heirs/estimation/dsd_mo.hpp"
#include "heirs/experiments/metrics.hpp"

namespace heirs {

enum class Architecture { kHeIrs, kIrs, kSirs };
enum class CsiMode { kEstimated, kPerfect };
enum class SweepVariable { kTtra, kBsPower, kPnr, kRank };

std::string to_string(Architecture a);
std::string to_string(CsiMode c);
std::string to_string(SweepVariable v);
Architecture parse_architecture(const std::string& s);
CsiMode parse_csi_mode(const std::string& s);
SweepVariable parse_sweep_variable(const std::string& s);

/// Scenario of one architecture cut from the base surface: irs makes every
/// element a DTE, sirs keeps only the DTE panel, he-irs keeps the split.
SystemConfig architecture_config(const SystemConfig& base, Architecture a);

/// Channels of `a` from a drop of the full base surface (shared across
/// architectures).
ChannelRealization restrict_to_architecture(const ChannelRealization& full, const SystemConfig& base,
                                            Architecture a);

struct ExperimentSpec {
  std::string preset = "desk";
  SystemConfig system = SystemConfig::reference();
  std::vector<Architecture> architectures{Architecture::kHeIrs};
  std::vector<CsiMode> csi{CsiMode::kEstimated};
  SweepVariable variable = SweepVariable::kTtra;
  std::vector<double> grid{360};
  int t_tra = 360;  // used when T_tra is not swept
  int trials = 50;
  int threads = 1;
  std::uint64_t seed = 1;
  std::string output = "heirs_sweep.csv";

  EstimationOptions estimation;
  WmmseOptions wmmse;
  WbsOptions wbs;
  bool random_ste = false;  // random STE phases instead of the wide beam
  PowerModel power;

  void validate() const;
};

/// Scenario and T_tra of one grid point.
struct GridPoint {
  SystemConfig system;
  int t_tra = 0;
};
GridPoint apply_grid_value(const ExperimentSpec& spec, double value);

struct MetricRecord {
  Architecture architecture = Architecture::kHeIrs;
  CsiMode csi = CsiMode::kEstimated;
  double value = 0.0;  // sweep coordinate
  int trial = 0;
  std::uint64_t seed = 0;
  int t_tra = 0;
  double pnr_db = 0.0;
  double snr_db = 0.0;
  double bs_power_dbm = 0.0;
  int true_rank = 0;
  int est_rank = 0;
  double nmse_dte = 0.0;  // NaN when not estimated or no DTE
  double nmse_ste = 0.0;  // NaN when not estimated or no STE
  std::vector<double> rates;
  double sum_rate = 0.0;
  double total_power = 0.0;
  double energy_efficiency = 0.0;
  double wall_seconds = 0.0;  // not written to CSV
  bool failed = false;
  std::string error;
};

/// splitmix64 finalizer of master ^ golden * (index + 1).
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Everything one trial needs that does not depend on the drop.
struct TrialContext {
  SystemConfig base;  // full surface
  SystemConfig system;  // architecture cut
  Architecture architecture = Architecture::kHeIrs;
  Dictionaries dictionaries;
  CVector wide_beam;  // WBS-MO output, empty without STEs
};
TrialContext make_context(const ExperimentSpec& spec, const GridPoint& point, Architecture a);

/// Matrices behind one record, for single-shot dumps.
struct TrialDetail {
  CVector ste_phases;  // uplink orientation, as in G_STE diag(w) H_STE
  std::vector<CMatrix> cascaded_true;
  std::vector<CMatrix> equivalent_true;
  std::vector<CMatrix> cascaded_used;  // estimates, or the truth with perfect CSI
  std::vector<CMatrix> equivalent_used;
  BeamformingSolution solution;
};

/// Drop -> pilots -> estimation -> beamforming -> metrics. Never throws;
/// failures are flagged in the record.
MetricRecord run_trial(const ExperimentSpec& spec, const TrialContext& ctx, int t_tra, CsiMode csi,
                       int trial, double value, TrialDetail* detail = nullptr);

struct SweepResult {
  std::vector<MetricRecord> records;  // sorted by (architecture, csi, value, trial)
  int failures = 0;
};

/// Runs every grid point x architecture x csi x trial on `spec.threads`
/// workers. Output is independent of the worker count. Failed trials are
/// recorded, not thrown.
SweepResult run_sweep(const ExperimentSpec& spec);

/// Throws when more than 20% of the trials failed.
void check_failure_budget(const SweepResult& result);

/// Mean of `field` over successful records grouped by the sweep value.
struct CurvePoint {
  double value = 0.0;
  double mean = 0.0;
  double median = 0.0;
  int count = 0;
};
enum class Field { kSumRate, kNmseDte, kNmseSte, kEnergyEfficiency };
std::vector<CurvePoint> curve(const std::vector<MetricRecord>& records, Architecture a, CsiMode c,
                              Field field);

/// Grid value with the largest mean; ties go to the smaller value.
double best_ttra(const std::vector<CurvePoint>& curve);

/// RFC 4180 writer helpers.
std::string csv_escape(const std::string& field);
std::string csv_number(double v);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

void write_records_csv(std::ostream& out, const std::vector<MetricRecord>& records);
void write_records_csv(const std::string& path, const std::vector<MetricRecord>& records);

enum class PlotKind { kNmseVsT, kRateVsT, kRateVsPb, kEeCdf, kNmseVsRank };
PlotKind parse_plot_kind(const std::string& s);
std::string to_string(PlotKind k);
void emit_plotdata(std::ostream& out, const std::vector<MetricRecord>& records, PlotKind kind);
void emit_plotdata(const std::string& path, const std::vector<MetricRecord>& records, PlotKind kind);

}  // namespace heirs
