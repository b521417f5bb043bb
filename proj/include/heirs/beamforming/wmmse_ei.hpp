#pragma once

#include <cstdint>
#include <vector>

#include "heirs/numerics/linalg.hpp"

namespace heirs {

/// Downlink model H_e,k = (mat(H_ca,k^DTE phi*) + H_eq,k^STE)^H, kept in the
/// per-element form H_e,k = phi_m U_k,m + T_k.
class EquivalentDownlink {
 public:
  /// `h_ca_dte[k]` is N_BS N_UE x N_DTE, `h_eq[k]` is N_BS x N_UE.
  EquivalentDownlink(const std::vector<CMatrix>& h_ca_dte, const std::vector<CMatrix>& h_eq,
                     const CVector& phases);

  Index users() const { return static_cast<Index>(h_e_.size()); }
  Index n_dte() const { return phases_.size(); }
  Index n_bs() const { return n_bs_; }
  Index n_ue() const { return n_ue_; }

  const CVector& phases() const { return phases_; }
  const CMatrix& channel(Index k) const { return h_e_[k]; }  // N_UE x N_BS
  const std::vector<CMatrix>& channels() const { return h_e_; }
  /// U_k,m = mat(column m of H_ca,k^DTE)^H.
  const CMatrix& slice(Index k, Index m) const { return slices_[k][m]; }
  /// T_k = H_e,k - phi_m U_k,m.
  CMatrix residual(Index k, Index m) const { return h_e_[k] - phases_(m) * slices_[k][m]; }
  /// Stacked [H_e,1; ...; H_e,K].
  CMatrix stacked() const;

  /// Changes phi_m and updates every H_e,k in place.
  void set_phase(Index m, Complex value);

  /// Direct sum over all elements, for checking the incremental state.
  CMatrix rebuild(Index k) const;

 private:
  Index n_bs_ = 0;
  Index n_ue_ = 0;
  CVector phases_;
  std::vector<std::vector<CMatrix>> slices_;
  std::vector<CMatrix> h_ste_;  // H_eq,k^H
  std::vector<CMatrix> h_e_;
};

/// Columns k N_s .. (k+1) N_s - 1 of V.
CMatrix user_block(const CMatrix& v, Index k, Index n_s);

/// Lambda_k = sigma^2 I + sum_{i != k} H_k V_i V_i^H H_k^H.
CMatrix interference_covariance(const std::vector<CMatrix>& h_e, const CMatrix& v, Index k,
                                Index n_s, double noise);

/// (1 - T_tra / T_tot) log2 det(I + V_k^H H_k^H Lambda_k^-1 H_k V_k) per user.
std::vector<double> effective_rate(const std::vector<CMatrix>& h_e, const CMatrix& v, double noise,
                                   Index n_s, double t_tra, double t_tot);

struct Receivers {
  std::vector<CMatrix> w;        // N_UE x N_s
  std::vector<CMatrix> weights;  // Upsilon_k, N_s x N_s
  std::vector<CMatrix> mse;      // E_k at the returned W
};

/// E_k = (I - W^H H_k V_k)(.)^H + sum_{i != k} W^H H_k V_i V_i^H H_k^H W + sigma^2 W^H W.
CMatrix mse_matrix(const CMatrix& h_k, const CMatrix& v, const CMatrix& w, Index k, Index n_s,
                   double noise);

/// MMSE combiners only.
std::vector<CMatrix> mmse_receivers(const std::vector<CMatrix>& h_e, const CMatrix& v, Index n_s,
                                    double noise);

/// Upsilon_k = E_k^-1, with a 1e-12 trace-scaled ridge if E_k is near singular.
CMatrix inverse_mse_weight(const CMatrix& e);

/// MMSE combiners, their MSE matrices and the inverse-MSE weights.
Receivers wmmse_update_receivers(const std::vector<CMatrix>& h_e, const CMatrix& v, Index n_s,
                                 double noise);

/// sum_k Tr(Upsilon_k E_k) - log det Upsilon_k (natural log).
double wmmse_cost(const std::vector<CMatrix>& h_e, const CMatrix& v, const std::vector<CMatrix>& w,
                  const std::vector<CMatrix>& weights, Index n_s, double noise);

struct PrecoderUpdate {
  CMatrix v;
  double mu = 0.0;
};

/// Minimizer of the WMMSE cost over V with Tr(V V^H) <= P_b; mu by bisection.
PrecoderUpdate wmmse_update_precoder(const std::vector<CMatrix>& h_e, const std::vector<CMatrix>& w,
                                     const std::vector<CMatrix>& weights, double power, Index n_s);

/// c_m = Tr(Ups W^H T V V^H U_m^H W - Ups V^H U_m^H W) with block-diagonal W
/// and Upsilon; the phase-dependent cost is 2 Re{c_m phi_m^*}.
Complex ei_coefficient(const EquivalentDownlink& link, Index m, const std::vector<CMatrix>& w,
                       const std::vector<CMatrix>& weights, const CMatrix& v, Index n_s);

/// One ascending sweep over the DTEs. `levels` empty means continuous phases.
/// An element keeps its phase unless a level strictly lowers the cost.
void ei_update_dte_phases(EquivalentDownlink& link, const std::vector<CMatrix>& w,
                          const std::vector<CMatrix>& weights, const CMatrix& v, Index n_s,
                          const std::vector<Complex>& levels);

/// Element-wise ascent of the total channel gain sum_k ||H_e,k||_F^2 over
/// the level set (continuous when empty), starting from the current phases.
/// Stops after a sweep without changes or after `sweeps` sweeps.
void gain_ascent_phases(EquivalentDownlink& link, const std::vector<Complex>& levels, int sweeps);

struct WmmseOptions {
  Index streams = 1;
  int max_iterations = 100;
  double tolerance = 1e-6;  // relative WMMSE cost change per iteration
  bool continuous_phases = false;
  int init_sweeps = 10;  // gain-ascent sweeps for the default starting phases
  int restarts = 4;      // extra runs from random phases; the best final rate is kept
  std::uint64_t seed = 0x77e1;
};

struct BeamformingSolution {
  CVector dte_phases;
  CMatrix v;
  std::vector<CMatrix> w;
  std::vector<CMatrix> weights;
  std::vector<double> cost_trace;  // after every block update
  std::vector<double> rate_trace;  // estimated-channel sum rate after every iteration (bits)
  int iterations = 0;
};

/// Alternating W, Upsilon, V and DTE-phase updates on the given channels.
/// With `initial_phases` given, one run starts there. Otherwise the first run
/// starts from all ones refined by gain_ascent_phases() and `restarts` more
/// start from random levels; the run with the highest final sum rate wins.
BeamformingSolution wmmse_ei(const std::vector<CMatrix>& h_ca_dte, const std::vector<CMatrix>& h_eq,
                             double power, double noise, const std::vector<Complex>& levels,
                             const WmmseOptions& options = {}, const CVector& initial_phases = {});

}  // namespace heirs
