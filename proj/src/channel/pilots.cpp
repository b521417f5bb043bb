#include "heirs/channel/pilots.hpp"

#include <cmath>

#include "heirs/channel/arrays.hpp"

namespace heirs {

CMatrix PilotBlock::surface_phases() const {
  CMatrix psi(dte_phases.rows() + ste_phases.size(), length());
  psi.topRows(dte_phases.rows()) = dte_phases;
  if (ste_phases.size() > 0) psi.bottomRows(ste_phases.size()) = ste_phases.replicate(1, length());
  return psi;
}

PilotBlock generate_pilot_block(const SystemConfig& cfg, int user, Index length,
                                const CVector& ste_phases, std::mt19937_64& rng) {
  if (length < 0) throw DimensionError("generate_pilot_block: negative pilot count");
  if (ste_phases.size() != cfg.n_ste()) {
    throw DimensionError("generate_pilot_block: STE phase vector must have N_STE entries");
  }
  PilotBlock block;
  block.user = user;
  block.ste_phases = ste_phases;
  block.noise_power = cfg.noise_power;
  block.symbols = complex_normal_matrix(cfg.n_ue, length, rng);
  const double amplitude = std::sqrt(cfg.pilot_power);
  for (Index t = 0; t < length; ++t) {
    const double norm = block.symbols.col(t).norm();
    block.symbols.col(t) *= amplitude / norm;
  }

  const std::vector<Complex> levels = phase_set(cfg.phase_bits);
  std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
  block.dte_phases.resize(cfg.n_dte(), length);
  for (Index t = 0; t < length; ++t) {
    for (Index m = 0; m < cfg.n_dte(); ++m) block.dte_phases(m, t) = levels[pick(rng)];
  }
  return block;
}

void observe(PilotBlock& block, const ChannelRealization& ch, std::mt19937_64& rng) {
  const Index k = block.user;
  if (k < 0 || k >= ch.users()) throw DimensionError("observe: user index out of range");
  if (block.symbols.rows() != ch.n_ue() || block.dte_phases.rows() != ch.n_dte() ||
      block.ste_phases.size() != ch.n_ste() || block.dte_phases.cols() != block.length()) {
    throw DimensionError("observe: pilot block does not match the channel dimensions");
  }
  const CMatrix& s = block.symbols;
  const CMatrix dte_in = block.dte_phases.cwiseProduct(ch.h_dte(k) * s);
  block.received = ch.g_dte() * dte_in;
  if (ch.n_ste() > 0) block.received += ch.h_eq_ste(k, block.ste_phases) * s;
  if (block.noise_power > 0.0) {
    block.received += complex_normal_matrix(ch.n_bs(), block.length(), rng, block.noise_power);
  }
}

}  // namespace heirs
