#include "heirs/estimation/lemma1.hpp"

namespace heirs {

namespace {

CMatrix stacked_factor(const PilotBlock& block) {
  return khatri_rao(block.surface_phases(), block.symbols);
}

}  // namespace

CMatrix measurement_matrix(const PilotBlock& block, Index n_bs) {
  return kron(stacked_factor(block).transpose(), CMatrix::Identity(n_bs, n_bs));
}

LsCascadedResult ls_overall_cascaded(const PilotBlock& block) {
  if (!block.observed()) throw DimensionError("ls_overall_cascaded: block has no observations");
  const CMatrix m = stacked_factor(block);  // N_UE N x T
  const Index n_bs = block.received.rows();
  const Index n_ue = block.symbols.rows();
  const Index n = m.rows() / n_ue;

  // J vec(X) = vec(X M) for X = [mat(h_ca col 1), ...] of size N_BS x N_UE N.
  const CMatrix x = block.received * pseudo_inverse(m);
  LsCascadedResult out;
  out.h_ca = mat(vec(x), n_bs * n_ue, n);
  out.rank = n_bs * numerical_rank(m);
  out.deficiency = n_ue * n_bs * n - out.rank;
  return out;
}

}  // namespace heirs
