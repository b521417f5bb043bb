#include "heirs/experiments/metrics.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace heirs {

double nmse(const std::vector<CMatrix>& truth, const std::vector<CMatrix>& estimate) {
  if (truth.empty() || truth.size() != estimate.size())
    throw DimensionError("nmse: need one estimate per true matrix");
  double sum = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k].rows() != estimate[k].rows() || truth[k].cols() != estimate[k].cols())
      throw DimensionError("nmse: shape mismatch");
    const double den = truth[k].squaredNorm();
    if (!(den > 0.0)) throw std::invalid_argument("nmse: true matrix has zero norm");
    sum += (truth[k] - estimate[k]).squaredNorm() / den;
  }
  return sum / static_cast<double>(truth.size());
}

void PowerModel::validate() const {
  if (bs_circuit < 0 || ue_circuit < 0 || surface_static < 0 || pin_diode < 0)
    throw std::invalid_argument("PowerModel: powers must be non-negative");
}

int diode_count(Complex phase, int bits) {
  if (bits < 1 || bits > 16) throw std::invalid_argument("diode_count: bits out of range");
  const double levels = std::ldexp(1.0, bits);
  double angle = std::arg(phase);
  if (angle < 0.0) angle += 2.0 * kPi;
  const auto index = static_cast<unsigned>(std::lround(angle / (2.0 * kPi) * levels)) %
                     static_cast<unsigned>(levels);
  return std::popcount(index);
}

double surface_power(const CVector& dte_phases, int bits, const PowerModel& model) {
  double on = 0.0;
  for (Index m = 0; m < dte_phases.size(); ++m) on += diode_count(dte_phases(m), bits);
  return model.surface_static + on * model.pin_diode;
}

double total_power(double bs_power, int users, const CVector& dte_phases, int bits,
                   const PowerModel& model) {
  return bs_power + users * model.ue_circuit + model.bs_circuit +
         surface_power(dte_phases, bits, model);
}

double energy_efficiency(const std::vector<double>& rates, double bs_power, int users,
                         const CVector& dte_phases, int bits, const PowerModel& model) {
  const double sum = std::accumulate(rates.begin(), rates.end(), 0.0);
  return sum / total_power(bs_power, users, dte_phases, bits, model);
}

}  // namespace heirs
