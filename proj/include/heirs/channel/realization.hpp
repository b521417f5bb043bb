#pragma once

#include <random>
#include <vector>

#include "heirs/channel/config.hpp"
#include "heirs/numerics/linalg.hpp"

namespace heirs {

/// One propagation path. For the surface-to-BS link `ula_angle` is the BS
/// arrival angle and (azimuth, elevation) the surface departure; for the
/// user-to-surface link `ula_angle` is the user departure angle and
/// (azimuth, elevation) the surface arrival.
struct PropagationPath {
  Complex gain;
  double ula_angle = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  bool line_of_sight = false;
};

using PathSet = std::vector<PropagationPath>;

/// Channel matrices of one drop. Surface columns (of G) and rows (of H_k)
/// are ordered iy * n_z + iz, so the DTE panel is the leading n_dte block.
class ChannelRealization {
 public:
  ChannelRealization(CMatrix g, std::vector<CMatrix> h, Index n_dte, PathSet paths_g = {},
                     std::vector<PathSet> paths_h = {}, double tau_bi = 0.0, double tau_iu = 0.0);

  const CMatrix& g() const { return g_; }
  const CMatrix& h(Index k) const { return h_.at(static_cast<std::size_t>(k)); }
  Index users() const { return static_cast<Index>(h_.size()); }
  Index n() const { return g_.cols(); }
  Index n_dte() const { return n_dte_; }
  Index n_ste() const { return g_.cols() - n_dte_; }
  Index n_bs() const { return g_.rows(); }
  Index n_ue() const { return h_.empty() ? 0 : h_.front().cols(); }

  CMatrix g_dte() const { return g_.leftCols(n_dte_); }
  CMatrix g_ste() const { return g_.rightCols(n_ste()); }
  CMatrix h_dte(Index k) const { return h(k).topRows(n_dte_); }
  CMatrix h_ste(Index k) const { return h(k).bottomRows(n_ste()); }

  /// H_k^T khatri-rao G, N_BS N_UE x N.
  CMatrix cascaded(Index k) const;
  /// H_DTE,k^T khatri-rao G_DTE, N_BS N_UE x N_DTE.
  CMatrix cascaded_dte(Index k) const;
  /// G_STE diag(omega) H_STE,k, N_BS x N_UE.
  CMatrix h_eq_ste(Index k, const CVector& omega) const;

  const PathSet& paths_g() const { return paths_g_; }
  const std::vector<PathSet>& paths_h() const { return paths_h_; }
  double tau_bi() const { return tau_bi_; }
  double tau_iu() const { return tau_iu_; }

 private:
  CMatrix g_;
  std::vector<CMatrix> h_;
  Index n_dte_;
  PathSet paths_g_;
  std::vector<PathSet> paths_h_;
  double tau_bi_;
  double tau_iu_;
};

/// CN(0, variance) sample built from two real normals scaled by 1/sqrt(2).
Complex complex_normal(std::mt19937_64& rng, double variance = 1.0);

/// Matrix of i.i.d. CN(0, variance) entries.
CMatrix complex_normal_matrix(Index rows, Index cols, std::mt19937_64& rng, double variance = 1.0);

/// Draws the paths of the surface-to-BS link: a fixed LoS path from the
/// config geometry plus paths_g - 1 random NLoS paths.
PathSet draw_bs_paths(const SystemConfig& cfg, std::mt19937_64& rng);

/// Draws the paths of one user link: a LoS path arriving from the user area
/// plus paths_h - 1 random NLoS paths.
PathSet draw_user_paths(const SystemConfig& cfg, std::mt19937_64& rng);

CMatrix bs_channel(const SystemConfig& cfg, const PathSet& paths);
CMatrix user_channel(const SystemConfig& cfg, const PathSet& paths);

/// Saleh-Valenzuela drop of G and H_1..H_K.
ChannelRealization synthesize_channels(const SystemConfig& cfg, std::mt19937_64& rng);

}  // namespace heirs
