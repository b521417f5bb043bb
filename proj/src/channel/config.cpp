#include "heirs/channel/config.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace heirs {

double path_loss(double distance_m) {
  return std::pow(10.0, -4.99 - 2.0 * std::log10(distance_m));
}

double SystemConfig::tau_bi() const { return path_loss(d_bi); }
double SystemConfig::tau_iu() const { return path_loss(d_iu); }

void SystemConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("SystemConfig: " + what);
  };
  require(n_bs >= 1 && n_ue >= 1 && users >= 1, "array sizes and user count must be >= 1");
  require(n_y >= 1 && n_z >= 1, "surface dimensions must be >= 1");
  require(n_dte_y >= 0 && n_dte_y <= n_y, "n_dte_y must lie in [0, n_y]");
  require(paths_g >= 1 && paths_h >= 1, "path counts must be >= 1");
  require(phase_bits >= 1 && phase_bits <= 16, "phase_bits must lie in [1, 16]");
  require(wavelength > 0.0 && spacing > 0.0, "wavelength and spacing must be positive");
  require(pilot_power > 0.0 && bs_power > 0.0, "powers must be positive");
  require(noise_power >= 0.0 && downlink_noise > 0.0, "noise powers must be non-negative");
  require(coherence_symbols >= 1, "coherence_symbols must be >= 1");
  require(d_bi > 0.0 && d_iu > 0.0, "distances must be positive");
  require(ue_area.azimuth_min <= ue_area.azimuth_max &&
              ue_area.elevation_min <= ue_area.elevation_max,
          "user area bounds are reversed");
  require(nlos_gain_ratio >= 0.0, "nlos_gain_ratio must be non-negative");
}

SystemConfig SystemConfig::reference() {
  SystemConfig cfg;
  set_pnr_db(cfg, 15.0);
  set_snr_db(cfg, 0.0);
  return cfg;
}

double pnr_db(const SystemConfig& cfg) {
  return linear_to_db(cfg.pilot_power * cfg.tau_bi() * cfg.tau_iu() / cfg.noise_power);
}

double snr_db(const SystemConfig& cfg) {
  return linear_to_db(cfg.bs_power * cfg.tau_bi() * cfg.tau_iu() / cfg.downlink_noise);
}

void set_pnr_db(SystemConfig& cfg, double pnr) {
  cfg.noise_power = cfg.pilot_power * cfg.tau_bi() * cfg.tau_iu() / db_to_linear(pnr);
}

void set_snr_db(SystemConfig& cfg, double snr) {
  cfg.downlink_noise = cfg.bs_power * cfg.tau_bi() * cfg.tau_iu() / db_to_linear(snr);
}

}  // namespace heirs
