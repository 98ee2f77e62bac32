#pragma once

#include <vector>

#include "nvdnp/pulse.hpp"

// Numerical optimization of phase-alternating composite pi pulses: maximize
// the detuning bandwidth over which single-pulse inversion fidelity stays
// above a threshold.

namespace nvdnp {

struct OptimizerConfig {
  int n_sidebands = 2;
  double fidelity_threshold = 0.99;
  std::vector<double> delta_grid_mhz;  // empty: 81 points over +-1.5 Omega
  int budget = 40000;                  // max objective evaluations, all restarts
  unsigned long seed = 1;
  int restarts = 16;

  void validate() const;
};

struct CandidatePulse {
  std::vector<double> a_list;        // [a_n, ..., a_1, a_0]
  double bandwidth_mhz = 0.0;        // objective value
  double min_fidelity_in_band = 0.0;
  bool feasible = false;
};

std::vector<double> default_delta_grid(double omega1_mhz, int points = 81,
                                       double span_factor = 1.5);

// Largest symmetric contiguous detuning interval around zero on which the
// inversion fidelity F = (1 - <sigma_z>)/2 stays >= threshold.
double objective(const std::vector<double>& a_list, double omega1_mhz, double threshold,
                 const std::vector<double>& delta_grid_mhz);

// Seeded simplex search with box constraints a in [0, 1.2] and deterministic
// restarts; returns the best candidate (rectangular baseline, flagged
// infeasible, when nothing beats zero bandwidth).
CandidatePulse optimize(const OptimizerConfig& config, double omega1_mhz);

struct PulseAccounting {
  double duration = 0.0;  // pi-pulse multiples, waits included
  double power = 0.0;     // on-time only
};

PulseAccounting accounting(const std::vector<double>& a_list);

}  // namespace nvdnp
