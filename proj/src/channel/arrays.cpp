#include "heirs/channel/arrays.hpp"

#include <cmath>
#include <stdexcept>

namespace heirs {

CVector ula_response(double u, Index m) {
  if (m < 1) throw DimensionError("ula_response: array size must be >= 1");
  CVector a(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index i = 0; i < m; ++i) a(i) = std::polar(scale, kPi * static_cast<double>(i) * u);
  return a;
}

CVector upa_response(double azimuth, double elevation, Index n_y, Index n_z) {
  const CVector a_y = ula_response(std::sin(azimuth) * std::sin(elevation), n_y);
  const CVector a_z = ula_response(std::cos(elevation), n_z);
  return kron(a_y, a_z);
}

RVector angle_grid(Index g) {
  RVector u(g);
  for (Index i = 0; i < g; ++i) u(i) = -1.0 + static_cast<double>(i) * 2.0 / static_cast<double>(g);
  return u;
}

CMatrix ula_dictionary(Index m, Index g) {
  const RVector u = angle_grid(g);
  CMatrix a(m, g);
  for (Index i = 0; i < g; ++i) a.col(i) = ula_response(u(i), m);
  return a;
}

namespace {

Index resolve(Index requested, Index size, const char* name) {
  if (requested == 0) return size;
  if (requested < size) {
    throw std::invalid_argument(std::string("build_dictionaries: resolution ") + name +
                                " is below the array size");
  }
  return requested;
}

}  // namespace

Dictionaries build_dictionaries(const SystemConfig& cfg, const DictionaryResolution& res) {
  Dictionaries d;
  d.a_bs = ula_dictionary(cfg.n_bs, resolve(res.bs, cfg.n_bs, "bs"));
  d.a_ue = ula_dictionary(cfg.n_ue, resolve(res.ue, cfg.n_ue, "ue"));

  if (cfg.n_dte() > 0) {
    const CMatrix y = ula_dictionary(cfg.n_dte_y, resolve(res.dte_y, cfg.n_dte_y, "dte_y"));
    const CMatrix z = ula_dictionary(cfg.n_z, resolve(res.dte_z, cfg.n_z, "dte_z"));
    d.a_dte = kron(y, z);
  } else {
    d.a_dte = CMatrix(0, 0);
  }

  if (cfg.n_ste() > 0) {
    const Index g_y = resolve(res.ste_y, cfg.n_ste_y(), "ste_y");
    const RVector u = angle_grid(g_y);
    CMatrix y = ula_dictionary(cfg.n_ste_y(), g_y);
    for (Index i = 0; i < g_y; ++i) {
      y.col(i) *= std::polar(1.0, kPi * static_cast<double>(cfg.n_dte_y - 1) * u(i));
    }
    const CMatrix z = ula_dictionary(cfg.n_z, resolve(res.ste_z, cfg.n_z, "ste_z"));
    d.a_ste = kron(y, z);
  } else {
    d.a_ste = CMatrix(0, 0);
  }
  return d;
}

std::vector<Complex> phase_set(int bits) {
  if (bits < 1 || bits > 16) throw std::invalid_argument("phase_set: bits must lie in [1, 16]");
  const int levels = 1 << bits;
  std::vector<Complex> out(levels);
  for (int i = 0; i < levels; ++i) out[i] = std::polar(1.0, 2.0 * kPi * i / levels);
  // Exact values for the common levels keep b = 1 patterns at +-1.
  if (levels >= 2) out[levels / 2] = Complex(-1.0, 0.0);
  if (levels >= 4) {
    out[levels / 4] = Complex(0.0, 1.0);
    out[3 * levels / 4] = Complex(0.0, -1.0);
  }
  return out;
}

Complex nearest_level(Complex target, const std::vector<Complex>& levels) {
  Complex best = levels.front();
  double best_dist = std::norm(target - best);
  for (const Complex& l : levels) {
    const double d = std::norm(target - l);
    if (d < best_dist) {
      best = l;
      best_dist = d;
    }
  }
  return best;
}

}  // namespace heirs
