#pragma once

#include <random>

#include "heirs/channel/config.hpp"
#include "heirs/channel/realization.hpp"

namespace heirs {

/// Uplink training block of one user.
struct PilotBlock {
  int user = 0;
  CMatrix symbols;     // N_UE x T, each column of power P_tr
  CMatrix dte_phases;  // N_DTE x T, column t is diag(Phi_k[t])
  CVector ste_phases;  // N_STE, fixed across pilots
  CMatrix received;    // N_BS x T, empty until observe()
  double noise_power = 0.0;

  Index length() const { return symbols.cols(); }
  bool observed() const { return received.cols() == symbols.cols() && received.size() > 0; }
  /// Full surface configurations psi_k[t] = [phi_k[t]; omega], N x T.
  CMatrix surface_phases() const;
};

/// Pilots with random directions scaled to power P_tr and DTE phases drawn
/// i.i.d. uniformly from the 2^b levels. T = 0 yields an empty block.
PilotBlock generate_pilot_block(const SystemConfig& cfg, int user, Index length,
                                const CVector& ste_phases, std::mt19937_64& rng);

/// Fills block.received with (G_DTE Phi H_DTE + G_STE Omega H_STE) s + z,
/// z ~ CN(0, sigma^2 I), using the block's own phases and noise power.
void observe(PilotBlock& block, const ChannelRealization& ch, std::mt19937_64& rng);

}  // namespace heirs
