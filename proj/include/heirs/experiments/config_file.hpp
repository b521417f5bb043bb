#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "heirs/experiments/harness.hpp"

namespace heirs {

/// "30 dBm", "1W", "15.8 mW" -> watts. A unit suffix is required.
double parse_power(const std::string& text);

/// "60, 90, 120" or the inclusive range "60:30:300" (start:step:stop).
std::vector<double> parse_grid(const std::string& text);

/// INI sections [system], [estimation], [beamforming], [sweep], [power].
/// Unknown sections or keys are rejected.
ExperimentSpec parse_experiment(std::istream& in);
ExperimentSpec load_experiment(const std::string& path);

}  // namespace heirs
