#pragma once

#include <vector>

#include "heirs/channel/config.hpp"
#include "heirs/numerics/linalg.hpp"

namespace heirs {

/// a(u, M) = [1, e^{j pi u}, ..., e^{j pi (M-1) u}]^T / sqrt(M).
CVector ula_response(double u, Index m);

/// a_y(theta, phi) kron a_z(phi) for an n_y x n_z planar array, with
/// a_y = a(sin theta sin phi, n_y) and a_z = a(cos phi, n_z).
CVector upa_response(double azimuth, double elevation, Index n_y, Index n_z);

/// Codebook grid -1 + i * 2 / g, i = 0..g-1.
RVector angle_grid(Index g);

/// Columns a(u_i, m) over angle_grid(g).
CMatrix ula_dictionary(Index m, Index g);

struct DictionaryResolution {
  Index bs = 0;     // 0 selects the array size
  Index ue = 0;
  Index dte_y = 0;
  Index dte_z = 0;
  Index ste_y = 0;
  Index ste_z = 0;
};

struct Dictionaries {
  CMatrix a_bs;   // N_BS x G_BS
  CMatrix a_ue;   // N_UE x G_UE
  CMatrix a_dte;  // N_DTE x G_DTE_y G_DTE_z
  CMatrix a_ste;  // N_STE x G_STE_y G_STE_z
};

/// Angular dictionaries of the base station, user, DTE and STE panels. The
/// STE y-codewords carry the extra e^{j pi (N_DTE_y - 1) u} panel offset.
/// Throws std::invalid_argument when a resolution is below its array size.
Dictionaries build_dictionaries(const SystemConfig& cfg, const DictionaryResolution& res = {});

/// The 2^bits phase levels e^{j 2 pi i / 2^bits}.
std::vector<Complex> phase_set(int bits);

/// Element of `levels` closest to `target` (smallest index wins ties).
Complex nearest_level(Complex target, const std::vector<Complex>& levels);

}  // namespace heirs
