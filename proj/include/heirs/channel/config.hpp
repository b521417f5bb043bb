#pragma once

#include <cstdint>

#include "heirs/numerics/linalg.hpp"

namespace heirs {

/// Rectangle of azimuth x elevation angles, radians.
struct AngularArea {
  double azimuth_min = 0.0;
  double azimuth_max = 0.0;
  double elevation_min = 0.0;
  double elevation_max = 0.0;
};

/// Dimensional, geometric and power constants of one scenario.
///
/// The surface is an n_y x n_z UPA split along y into two adjacent panels:
/// y-rows [0, n_dte_y) hold the dynamically tunable elements and
/// [n_dte_y, n_y) the statically tunable ones. Element index = iy * n_z + iz.
/// Powers are linear watts. Angles are radians.
struct SystemConfig {
  int n_bs = 12;
  int n_ue = 6;
  int users = 3;
  int n_y = 12;
  int n_z = 4;
  int n_dte_y = 6;
  int paths_g = 3;
  int paths_h = 3;
  double wavelength = 0.04;
  double spacing = 0.02;
  int phase_bits = 1;

  double pilot_power = 1.0;        // P_tr
  double noise_power = 1e-15;      // uplink sigma^2
  double bs_power = 1.0;           // P_b
  double downlink_noise = 1e-15;   // sigma_d^2
  int coherence_symbols = 1500;    // T_tot

  double d_bi = 25.0;
  double d_iu = 12.0;

  /// Surface departure angles towards the users (LoS paths are drawn here).
  AngularArea ue_area{-kPi / 4.0, kPi / 4.0, kPi / 2.0, kPi};
  /// Fixed BS-surface LoS geometry: BS-side ULA angle and the surface-side
  /// azimuth / elevation.
  double bs_los_angle = kPi / 3.0;
  double surface_los_azimuth = -kPi / 3.0;
  double surface_los_elevation = 2.0 * kPi / 3.0;
  double nlos_gain_ratio = 0.1;

  std::uint64_t seed = 1;

  int n_ste_y() const { return n_y - n_dte_y; }
  int n() const { return n_y * n_z; }
  int n_dte() const { return n_dte_y * n_z; }
  int n_ste() const { return n_ste_y() * n_z; }

  double tau_bi() const;
  double tau_iu() const;

  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;

  /// Defaults of the reference scenario: 12-antenna BS, three 6-antenna
  /// users, a 48-element surface with 24 DTEs and 24 STEs.
  static SystemConfig reference();
};

/// 10^(-4.99 - 2 log10(d)).
double path_loss(double distance_m);

/// Pilot-to-noise ratio P_tr tau_BI tau_IU / sigma^2 in dB.
double pnr_db(const SystemConfig& cfg);
/// Downlink SNR P_b tau_BI tau_IU / sigma_d^2 in dB.
double snr_db(const SystemConfig& cfg);
/// Sets the uplink noise power so that pnr_db(cfg) equals `pnr`.
void set_pnr_db(SystemConfig& cfg, double pnr);
/// Sets the downlink noise power so that snr_db(cfg) equals `snr`.
void set_snr_db(SystemConfig& cfg, double snr);

}  // namespace heirs
