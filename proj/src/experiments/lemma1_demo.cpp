#include "heirs/experiments/lemma1_demo.hpp"

#include <random>

#include "heirs/channel/arrays.hpp"
#include "heirs/channel/realization.hpp"
#include "heirs/estimation/lemma1.hpp"
#include "heirs/experiments/harness.hpp"

namespace heirs {

std::vector<Lemma1Row> lemma1_table(int trials, std::uint64_t seed, Index length) {
  std::vector<Lemma1Row> rows;
  for (int n_ste = 0; n_ste <= 3; ++n_ste) {
    SystemConfig cfg;
    cfg.n_bs = 2;
    cfg.n_ue = 2;
    cfg.users = 1;
    cfg.n_y = 6;
    cfg.n_z = 1;
    cfg.n_dte_y = 6 - n_ste;
    cfg.paths_g = cfg.paths_h = 2;
    cfg.noise_power = 0.0;
    const std::vector<Complex> levels = phase_set(1);
    for (int t = 0; t < trials; ++t) {
      std::mt19937_64 rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
      const ChannelRealization ch = synthesize_channels(cfg, rng);
      std::uniform_int_distribution<int> pick(0, 1);
      CVector omega(cfg.n_ste());
      for (Index i = 0; i < omega.size(); ++i) omega(i) = levels[static_cast<std::size_t>(pick(rng))];
      PilotBlock b = generate_pilot_block(cfg, 0, length, omega, rng);
      observe(b, ch, rng);
      const LsCascadedResult r = ls_overall_cascaded(b);
      rows.push_back({n_ste, t, r.rank, r.rank + r.deficiency, r.deficiency});
    }
  }
  return rows;
}

}  // namespace heirs
