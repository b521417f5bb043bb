#pragma once

#include <vector>

#include "heirs/numerics/linalg.hpp"

namespace heirs {

/// (1/K) sum_k ||X_k - X^_k||_F^2 / ||X_k||_F^2.
double nmse(const std::vector<CMatrix>& truth, const std::vector<CMatrix>& estimate);

/// Surface and transceiver power consumption in watts.
struct PowerModel {
  double bs_circuit = 1.0;              // P_BS_cir, 30 dBm
  double ue_circuit = 0.0316227766;     // P_UE_cir, 15 dBm
  double surface_static = 0.0316227766; // P_static, 15 dBm
  double pin_diode = 0.0158489319;      // P_PIN per on-state diode, 12 dBm

  void validate() const;
};

/// On-state PIN diodes of one DTE. Level i of the 2^b-level set exp(j 2 pi i / 2^b)
/// is driven by the b-bit pattern of i, one diode per bit, so for b = 1 phase 0
/// uses no diode and phase pi uses one.
int diode_count(Complex phase, int bits);

/// P_static + sum_m t_m P_PIN.
double surface_power(const CVector& dte_phases, int bits, const PowerModel& model);

/// P_b + K P_UE_cir + P_BS_cir + P_IRS.
double total_power(double bs_power, int users, const CVector& dte_phases, int bits,
                   const PowerModel& model);

/// sum_k R_k / P_total.
double energy_efficiency(const std::vector<double>& rates, double bs_power, int users,
                         const CVector& dte_phases, int bits, const PowerModel& model);

}  // namespace heirs
