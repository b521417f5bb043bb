#pragma once

#include <cstdint>
#include <vector>

#include "heirs/channel/config.hpp"
#include "heirs/numerics/riemannian_cg.hpp"

namespace heirs {

enum class Axis { kY, kZ };

/// Offline wide-beam target. Departure angles (azimuth, elevation) range over
/// `area`; the arrival direction from the BS is fixed. The rho bounds are the
/// exact ranges of
///   rho_y = sin(az_t) sin(el_t) - sin(az_r) sin(el_r),
///   rho_z = cos(el_t) - cos(el_r)
/// over the area.
struct WideBeamSpec {
  double arrival_azimuth = 0.0;
  double arrival_elevation = 0.0;
  AngularArea area;
  double rho_y_min = 0.0;
  double rho_y_max = 0.0;
  double rho_z_min = 0.0;
  double rho_z_max = 0.0;
  Index n_y = 1;  // STE columns along y
  Index n_z = 1;

  static WideBeamSpec make(double arrival_azimuth, double arrival_elevation,
                           const AngularArea& area, Index n_y, Index n_z);
  /// STE panel of `cfg` steered from the BS LoS arrival towards the user area.
  static WideBeamSpec from_config(const SystemConfig& cfg);

  Index size() const { return n_y * n_z; }
};

/// |a^H(t) diag(omega) a(r)|^2 with unit-modulus (unnormalized) STE steering
/// vectors, so the maximum is size()^2.
double directivity_gain(const WideBeamSpec& spec, const CVector& omega, double departure_azimuth,
                        double departure_elevation);

/// Unit-modulus b(rho) with entries exp(j pi n rho), n = 0..m-1.
CVector beam_vector(double rho, Index m);

/// Integral of b(rho) b(rho)^H over [rho_min, rho_max] in closed form:
/// diagonal rho_max - rho_min, entry (p, q) equal to
/// (exp(j pi (p-q) rho_max) - exp(j pi (p-q) rho_min)) / (j pi (p-q)).
CMatrix xi_matrix(Index m, double rho_min, double rho_max);
CMatrix xi_matrix(Axis axis, const WideBeamSpec& spec);

struct WbsOptions {
  int restarts = 8;
  std::uint64_t seed = 0x3b5;
  CgOptions cg;
};

struct AxisBeam {
  CVector omega;
  double value = 0.0;          // omega^H Xi omega
  std::vector<double> trace;   // value after every accepted step of the best start
};

struct WbsResult {
  AxisBeam y;
  AxisBeam z;
  CVector omega;  // y kron z
};

/// Maximizes w^H xi w over unit-modulus w by Riemannian CG from `restarts`
/// random starts and keeps the best.
AxisBeam maximize_on_circle(const CMatrix& xi, const WbsOptions& options, std::uint64_t seed);

WbsResult wbs_mo(const WideBeamSpec& spec, const WbsOptions& options = {});

}  // namespace heirs
