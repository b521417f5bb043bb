#include "heirs/experiments/config_file.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace heirs {

namespace pt = boost::property_tree;

namespace {

double to_double(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument("'" + key + "': not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s, const std::string& key) {
  const double v = to_double(s, key);
  if (v != std::floor(v)) throw std::invalid_argument("'" + key + "': not an integer: '" + s + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s, const std::string& key) {
  const std::string l = boost::to_lower_copy(s);
  if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
  if (l == "false" || l == "no" || l == "0" || l == "off") return false;
  throw std::invalid_argument("'" + key + "': not a boolean: '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  std::vector<std::string> out;
  for (std::string& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

/// Flat key/value view of one section with unknown-key checking.
class Section {
 public:
  Section(const pt::ptree& root, const std::string& name, std::set<std::string> allowed)
      : name_(name) {
    if (auto child = root.get_child_optional(name)) {
      for (const auto& [key, node] : *child) {
        if (!allowed.count(key)) throw std::invalid_argument("[" + name + "]: unknown key '" + key + "'");
        values_[key] = boost::trim_copy(node.data());
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& raw(const std::string& key) const { return values_.at(key); }
  std::string where(const std::string& key) const { return name_ + "." + key; }

  void get(const std::string& key, int& out) const {
    if (has(key)) out = to_int(raw(key), where(key));
  }
  void get(const std::string& key, Index& out) const {
    if (has(key)) out = to_int(raw(key), where(key));
  }
  void get(const std::string& key, double& out) const {
    if (has(key)) out = to_double(raw(key), where(key));
  }
  void get(const std::string& key, bool& out) const {
    if (has(key)) out = to_bool(raw(key), where(key));
  }
  void get_power(const std::string& key, double& out) const {
    if (has(key)) out = parse_power(raw(key));
  }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
};

}  // namespace

double parse_power(const std::string& text) {
  std::string s = boost::trim_copy(text);
  std::string lower = boost::to_lower_copy(s);
  struct Unit {
    const char* suffix;
    bool log;
    double scale;
  };
  for (const Unit& u : {Unit{"dbm", true, 1.0}, Unit{"mw", false, 1e-3}, Unit{"w", false, 1.0}}) {
    if (boost::ends_with(lower, u.suffix)) {
      const std::string number = boost::trim_copy(s.substr(0, s.size() - std::string(u.suffix).size()));
      const double v = to_double(number, "power '" + s + "'");
      if (u.log) return dbm_to_watt(v);
      if (v < 0) throw std::invalid_argument("power '" + s + "' is negative");
      return v * u.scale;
    }
  }
  throw std::invalid_argument("power '" + s + "' needs a unit suffix (dBm, mW or W)");
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string s = boost::trim_copy(text);
  std::vector<double> grid;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> p;
    boost::split(p, s, boost::is_any_of(":"));
    if (p.size() != 3) throw std::invalid_argument("grid range must be start:step:stop");
    const double a = to_double(boost::trim_copy(p[0]), "grid"), step = to_double(boost::trim_copy(p[1]), "grid"),
                 b = to_double(boost::trim_copy(p[2]), "grid");
    if (!(step > 0) || b < a) throw std::invalid_argument("grid range needs step > 0 and stop >= start");
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(a + static_cast<double>(i) * step);
  } else {
    for (const std::string& item : split_list(s)) grid.push_back(to_double(item, "grid"));
  }
  if (grid.empty()) throw std::invalid_argument("empty grid");
  return grid;
}

ExperimentSpec parse_experiment(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  static const std::set<std::string> sections{"system", "estimation", "beamforming", "sweep", "power"};
  for (const auto& [name, node] : root) {
    if (!sections.count(name)) throw std::invalid_argument("config: unknown section [" + name + "]");
  }

  ExperimentSpec spec;
  const Section sweep(root, "sweep",
                      {"preset", "architecture", "csi", "variable", "grid", "t_tra", "trials", "seed",
                       "threads", "output"});
  if (sweep.has("preset")) {
    spec.preset = sweep.raw("preset");
    if (spec.preset == "desk") {
      spec.trials = 50;
    } else if (spec.preset == "ci") {
      spec.trials = 10;
    } else if (spec.preset != "custom") {
      throw std::invalid_argument("sweep.preset must be desk, ci or custom");
    }
  }

  const Section sys(root, "system",
                    {"n_bs", "n_ue", "users", "n_y", "n_z", "n_dte_y", "paths", "paths_g", "paths_h",
                     "phase_bits", "pilot_power", "bs_power", "pnr_db", "snr_db", "snr_reference_power",
                     "coherence_symbols", "d_bi", "d_iu", "nlos_gain_ratio"});
  SystemConfig& c = spec.system;
  sys.get("n_bs", c.n_bs);
  sys.get("n_ue", c.n_ue);
  sys.get("users", c.users);
  sys.get("n_y", c.n_y);
  sys.get("n_z", c.n_z);
  sys.get("n_dte_y", c.n_dte_y);
  if (sys.has("paths")) c.paths_g = c.paths_h = to_int(sys.raw("paths"), "system.paths");
  sys.get("paths_g", c.paths_g);
  sys.get("paths_h", c.paths_h);
  sys.get("phase_bits", c.phase_bits);
  sys.get_power("pilot_power", c.pilot_power);
  sys.get_power("bs_power", c.bs_power);
  sys.get("coherence_symbols", c.coherence_symbols);
  sys.get("d_bi", c.d_bi);
  sys.get("d_iu", c.d_iu);
  sys.get("nlos_gain_ratio", c.nlos_gain_ratio);
  double pnr = 15.0, snr = 0.0, snr_ref = dbm_to_watt(30.0);
  sys.get("pnr_db", pnr);
  sys.get("snr_db", snr);
  sys.get_power("snr_reference_power", snr_ref);
  set_pnr_db(c, pnr);
  // The downlink noise is fixed by the SNR at the reference BS power, so
  // sweeping P_b changes the SNR.
  const double p_b = c.bs_power;
  c.bs_power = snr_ref;
  set_snr_db(c, snr);
  c.bs_power = p_b;

  const Section est(root, "estimation",
                    {"rank", "rank_g", "rank_h", "rank_eq", "auto_weights", "weight_scale", "weight_g",
                     "weight_h", "weight_row", "weight_col", "max_outer", "max_inner", "outer_tolerance",
                     "inner_tolerance", "cg_max_iterations", "init_seed"});
  EstimationOptions& e = spec.estimation;
  if (est.has("rank")) e.rank_g = e.rank_h = to_int(est.raw("rank"), "estimation.rank");
  est.get("rank_g", e.rank_g);
  est.get("rank_h", e.rank_h);
  est.get("rank_eq", e.rank_eq);
  est.get("auto_weights", e.auto_weights);
  est.get("weight_scale", e.weight_scale);
  est.get("weight_g", e.weights.g);
  est.get("weight_h", e.weights.h);
  est.get("weight_row", e.weights.row);
  est.get("weight_col", e.weights.col);
  est.get("max_outer", e.max_outer);
  est.get("max_inner", e.max_inner);
  est.get("outer_tolerance", e.outer_tolerance);
  est.get("inner_tolerance", e.inner_tolerance);
  est.get("cg_max_iterations", e.cg.max_iterations);
  if (est.has("init_seed")) e.init_seed = std::stoull(est.raw("init_seed"));

  const Section bf(root, "beamforming",
                   {"streams", "max_iterations", "tolerance", "continuous_phases", "ste", "restarts"});
  bf.get("streams", spec.wmmse.streams);
  bf.get("max_iterations", spec.wmmse.max_iterations);
  bf.get("tolerance", spec.wmmse.tolerance);
  bf.get("continuous_phases", spec.wmmse.continuous_phases);
  bf.get("restarts", spec.wbs.restarts);
  if (bf.has("ste")) {
    const std::string& m = bf.raw("ste");
    if (m == "random") spec.random_ste = true;
    else if (m == "wbs") spec.random_ste = false;
    else throw std::invalid_argument("beamforming.ste must be wbs or random");
  }

  const Section pw(root, "power", {"bs_circuit", "ue_circuit", "static", "pin"});
  pw.get_power("bs_circuit", spec.power.bs_circuit);
  pw.get_power("ue_circuit", spec.power.ue_circuit);
  pw.get_power("static", spec.power.surface_static);
  pw.get_power("pin", spec.power.pin_diode);

  if (sweep.has("architecture")) {
    spec.architectures.clear();
    for (const std::string& a : split_list(sweep.raw("architecture"))) spec.architectures.push_back(parse_architecture(a));
  }
  if (sweep.has("csi")) {
    spec.csi.clear();
    for (const std::string& m : split_list(sweep.raw("csi"))) spec.csi.push_back(parse_csi_mode(m));
  }
  if (sweep.has("variable")) spec.variable = parse_sweep_variable(sweep.raw("variable"));
  sweep.get("t_tra", spec.t_tra);
  if (sweep.has("grid")) spec.grid = parse_grid(sweep.raw("grid"));
  else if (spec.variable == SweepVariable::kTtra) spec.grid = {static_cast<double>(spec.t_tra)};
  else throw std::invalid_argument("sweep.grid is required when sweeping " + to_string(spec.variable));
  sweep.get("trials", spec.trials);
  sweep.get("threads", spec.threads);
  if (sweep.has("seed")) spec.seed = std::stoull(sweep.raw("seed"));
  if (sweep.has("output")) spec.output = sweep.raw("output");

  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return parse_experiment(in);
}

}  // namespace heirs
