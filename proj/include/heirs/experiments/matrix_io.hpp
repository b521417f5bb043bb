#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "heirs/numerics/linalg.hpp"

namespace heirs {

struct NamedMatrix {
  std::string name;
  CMatrix value;
};

/// JSON document {"matrices": [{"name", "rows", "cols", "data"}...]} where
/// "data" lists column-major [re, im] pairs.
void write_matrices(std::ostream& out, const std::vector<NamedMatrix>& matrices);
void write_matrices(const std::string& path, const std::vector<NamedMatrix>& matrices);
std::vector<NamedMatrix> read_matrices(std::istream& in);

/// '0'/'1' per DTE for one-bit phases (1 = phase pi).
std::string phase_bit_pattern(const CVector& phases);

}  // namespace heirs
