#pragma once

#include <cstdint>
#include <vector>

#include "heirs/numerics/linalg.hpp"

namespace heirs {

struct Lemma1Row {
  int n_ste = 0;
  int trial = 0;
  Index rank = 0;        // numerical rank of J_k
  Index columns = 0;     // N_UE N_BS N
  Index deficiency = 0;
  bool full_rank() const { return deficiency == 0; }
};

/// Rank of the overall-cascaded measurement matrix on a 6-element
/// single-column surface (N_BS = N_UE = 2) with N_STE = 0..3 static elements
/// and random +-1 training phases, `trials` drops each.
std::vector<Lemma1Row> lemma1_table(int trials, std::uint64_t seed, Index length = 48);

}  // namespace heirs
