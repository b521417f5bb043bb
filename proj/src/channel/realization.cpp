#include "heirs/channel/realization.hpp"

#include <cmath>
#include <utility>

#include "heirs/channel/arrays.hpp"

namespace heirs {

ChannelRealization::ChannelRealization(CMatrix g, std::vector<CMatrix> h, Index n_dte,
                                       PathSet paths_g, std::vector<PathSet> paths_h,
                                       double tau_bi, double tau_iu)
    : g_(std::move(g)),
      h_(std::move(h)),
      n_dte_(n_dte),
      paths_g_(std::move(paths_g)),
      paths_h_(std::move(paths_h)),
      tau_bi_(tau_bi),
      tau_iu_(tau_iu) {
  if (n_dte_ < 0 || n_dte_ > g_.cols()) {
    throw DimensionError("ChannelRealization: DTE count exceeds the surface size");
  }
  for (const CMatrix& hk : h_) {
    if (hk.rows() != g_.cols()) {
      throw DimensionError("ChannelRealization: H_k rows must match the columns of G");
    }
    if (hk.cols() != h_.front().cols()) {
      throw DimensionError("ChannelRealization: all users need the same antenna count");
    }
  }
}

CMatrix ChannelRealization::cascaded(Index k) const { return khatri_rao(h(k).transpose(), g_); }

CMatrix ChannelRealization::cascaded_dte(Index k) const {
  return khatri_rao(h_dte(k).transpose(), g_dte());
}

CMatrix ChannelRealization::h_eq_ste(Index k, const CVector& omega) const {
  if (omega.size() != n_ste()) throw DimensionError("h_eq_ste: omega length must equal N_STE");
  return g_ste() * omega.asDiagonal() * h_ste(k);
}

Complex complex_normal(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s = std::sqrt(variance / 2.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {s * re, s * im};
}

CMatrix complex_normal_matrix(Index rows, Index cols, std::mt19937_64& rng, double variance) {
  CMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = complex_normal(rng, variance);
  }
  return out;
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

PropagationPath nlos_path(const SystemConfig& cfg, double tau, std::mt19937_64& rng) {
  PropagationPath p;
  p.gain = complex_normal(rng, cfg.nlos_gain_ratio * tau);
  p.ula_angle = uniform(rng, 0.0, kPi);
  p.azimuth = uniform(rng, -kPi / 2.0, kPi / 2.0);
  p.elevation = uniform(rng, 0.0, kPi);
  return p;
}

}  // namespace

PathSet draw_bs_paths(const SystemConfig& cfg, std::mt19937_64& rng) {
  const double tau = cfg.tau_bi();
  PathSet paths;
  PropagationPath los;
  los.gain = complex_normal(rng, tau);
  los.ula_angle = cfg.bs_los_angle;
  los.azimuth = cfg.surface_los_azimuth;
  los.elevation = cfg.surface_los_elevation;
  los.line_of_sight = true;
  paths.push_back(los);
  for (int p = 1; p < cfg.paths_g; ++p) paths.push_back(nlos_path(cfg, tau, rng));
  return paths;
}

PathSet draw_user_paths(const SystemConfig& cfg, std::mt19937_64& rng) {
  const double tau = cfg.tau_iu();
  PathSet paths;
  PropagationPath los;
  los.gain = complex_normal(rng, tau);
  los.ula_angle = uniform(rng, 0.0, kPi);
  los.azimuth = uniform(rng, cfg.ue_area.azimuth_min, cfg.ue_area.azimuth_max);
  los.elevation = uniform(rng, cfg.ue_area.elevation_min, cfg.ue_area.elevation_max);
  los.line_of_sight = true;
  paths.push_back(los);
  for (int q = 1; q < cfg.paths_h; ++q) paths.push_back(nlos_path(cfg, tau, rng));
  return paths;
}

CMatrix bs_channel(const SystemConfig& cfg, const PathSet& paths) {
  const double scale = std::sqrt(static_cast<double>(cfg.n_bs) * cfg.n() /
                                 static_cast<double>(paths.size()));
  CMatrix g = CMatrix::Zero(cfg.n_bs, cfg.n());
  for (const PropagationPath& p : paths) {
    const CVector a_bs = ula_response(std::cos(p.ula_angle), cfg.n_bs);
    const CVector a_i = upa_response(p.azimuth, p.elevation, cfg.n_y, cfg.n_z);
    g += (scale * p.gain) * a_bs * a_i.adjoint();
  }
  return g;
}

CMatrix user_channel(const SystemConfig& cfg, const PathSet& paths) {
  const double scale = std::sqrt(static_cast<double>(cfg.n_ue) * cfg.n() /
                                 static_cast<double>(paths.size()));
  CMatrix h = CMatrix::Zero(cfg.n(), cfg.n_ue);
  for (const PropagationPath& p : paths) {
    const CVector a_i = upa_response(p.azimuth, p.elevation, cfg.n_y, cfg.n_z);
    const CVector a_ue = ula_response(std::cos(p.ula_angle), cfg.n_ue);
    h += (scale * p.gain) * a_i * a_ue.adjoint();
  }
  return h;
}

ChannelRealization synthesize_channels(const SystemConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  PathSet paths_g = draw_bs_paths(cfg, rng);
  std::vector<PathSet> paths_h;
  std::vector<CMatrix> h;
  for (int k = 0; k < cfg.users; ++k) {
    paths_h.push_back(draw_user_paths(cfg, rng));
    h.push_back(user_channel(cfg, paths_h.back()));
  }
  CMatrix g = bs_channel(cfg, paths_g);
  return ChannelRealization(std::move(g), std::move(h), cfg.n_dte(), std::move(paths_g),
                            std::move(paths_h), cfg.tau_bi(), cfg.tau_iu());
}

}  // namespace heirs
