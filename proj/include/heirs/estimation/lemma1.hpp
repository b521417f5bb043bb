#pragma once

#include "heirs/channel/pilots.hpp"

namespace heirs {

/// J_k = (L_k khatri-rao S_k)^T kron I_{N_BS}, with L_k the N x T matrix of
/// full surface configurations. Size N_BS T x N_UE N_BS N.
CMatrix measurement_matrix(const PilotBlock& block, Index n_bs);

struct LsCascadedResult {
  CMatrix h_ca;           // N_BS N_UE x N min-norm estimate
  Index rank = 0;         // numerical rank of J_k
  Index deficiency = 0;   // N_UE N_BS N - rank
};

/// Min-norm least-squares estimate of the overall cascaded channel from an
/// observed block. Solved through the N_UE N x T factor of J_k, whose
/// rank times N_BS is rank(J_k).
LsCascadedResult ls_overall_cascaded(const PilotBlock& block);

}  // namespace heirs
