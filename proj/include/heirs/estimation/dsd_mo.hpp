#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heirs/channel/arrays.hpp"
#include "heirs/channel/pilots.hpp"
#include "heirs/numerics/riemannian_cg.hpp"

namespace heirs {

/// Training data of one user: pilots S (N_UE x T), DTE phases Phi (N_DTE x T)
/// and observations R (N_BS x T).
struct DsdData {
  CMatrix symbols;
  CMatrix dte_phases;
  CMatrix received;

  static DsdData from_block(const PilotBlock& block);
  Index length() const { return symbols.cols(); }
};

/// Candidate (G_DTE, H_DTE, H_eq^STE).
struct DsdTriple {
  CMatrix g_dte;  // N_BS x N_DTE
  CMatrix h_dte;  // N_DTE x N_UE
  CMatrix h_eq;   // N_BS x N_UE
};

struct EstimationWeights {
  double g = 0.0;
  double h = 0.0;
  double row = 0.0;
  double col = 0.0;
};

/// Angular-domain sign patterns x/|x| of the four regularized projections.
/// Entries whose magnitude is below `delta` are stored as exact zeros.
struct GradientWorkspace {
  CMatrix y_g;    // of A_BS^H G A_DTE
  CMatrix y_h;    // of A_DTE^H H A_UE
  CVector y_row;  // of A_BS^H H_eq (A_UE 1)
  CVector y_col;  // of (1^T A_BS^H) H_eq A_UE, stored as a column

  static GradientWorkspace build(const DsdTriple& x, const Dictionaries& dict,
                                 double delta = 1e-8);
};

/// Element-wise x/|x| with zeros where |x| < delta.
CMatrix phase_sign(const CMatrix& x, double delta);

/// Residual R - G (Phi o (H S)) - H_eq S.
CMatrix dsd_residual(const DsdTriple& x, const DsdData& data);

/// Sum_t ||r_t - G Phi_t H s_t - H_eq s_t||^2 plus the four weighted l1
/// angular-sparsity terms.
double dsd_objective(const DsdTriple& x, const DsdData& data, const Dictionaries& dict,
                     const EstimationWeights& w);

/// Conjugate (Wirtinger) gradients d f / d X^*. The residual terms are exact;
/// the l1 terms use the workspace sign patterns.
CMatrix grad_g_dte(const DsdTriple& x, const DsdData& data, const Dictionaries& dict,
                   const EstimationWeights& w, const GradientWorkspace& ws);
CMatrix grad_h_dte(const DsdTriple& x, const DsdData& data, const Dictionaries& dict,
                   const EstimationWeights& w, const GradientWorkspace& ws);
CMatrix grad_h_eq_ste(const DsdTriple& x, const DsdData& data, const Dictionaries& dict,
                      const EstimationWeights& w, const GradientWorkspace& ws);

struct EstimationOptions {
  Index rank_g = 3;   // assumed rank of G_DTE
  Index rank_h = 3;   // assumed rank of H_DTE,k
  Index rank_eq = 0;  // 0 selects min(rank_g, rank_h)

  /// When set, each weight becomes weight_scale * sqrt(initial residual *
  /// expected noise energy) / initial l1 term once at initialization, so the
  /// penalty vanishes for noise-free pilots; otherwise `weights` is used as
  /// given (in the internal unit scaling).
  bool auto_weights = true;
  double weight_scale = 5e-3;
  EstimationWeights weights;
  double delta = 1e-8;

  int max_outer = 50;
  int max_inner = 20;
  double outer_tolerance = 1e-7;
  double inner_tolerance = 1e-6;
  CgOptions cg;

  std::uint64_t init_seed = 0x5eed;
};

struct UserEstimate {
  CMatrix g_dte;
  CMatrix h_dte;
  CMatrix h_eq_ste;
  CMatrix h_ca_dte;  // h_dte^T khatri-rao g_dte
  std::vector<double> objective_trace;  // after initialization and every block update
  int outer_iterations = 0;
  int inner_iterations = 0;
  int cg_iterations = 0;
  double residual_norm = 0.0;  // ||R - model|| in the units of the observations
  EstimationWeights weights;   // internal-scale weights actually used
  bool aborted = false;
  std::string diagnostic;
};

struct EstimationResult {
  std::vector<UserEstimate> users;
};

/// DSD-MO for one user. Data are rescaled internally so that pilots
/// have unit power and observations unit mean power; estimates are returned
/// in the original units.
UserEstimate estimate_user(const PilotBlock& block, const Dictionaries& dict,
                           const EstimationOptions& options);

/// Independent per-user runs of estimate_user(). Every user uses the same
/// initialization seed, so results do not depend on the user order.
EstimationResult estimate_dsd_mo(const std::vector<PilotBlock>& blocks, const Dictionaries& dict,
                                 const EstimationOptions& options);

}  // namespace heirs
