#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nvdnp/constants.hpp"

// PulsePol-family sequences (standard, phase-offset, composite-pulse) and
// their propagation on NV-nuclear model systems: tau scans, detuning
// robustness profiles, single-pulse inversion profiles and the NV-14N
// transition table.

namespace nvdnp {

struct PulseShape {
  enum class Kind { kRectangular, kPhaseAlternating };
  Kind kind = Kind::kRectangular;

  // Durations in units of pi/Omega, ordered [a_n, ..., a_1, a_0]; a_0 is the
  // half-length of the central positive-phase pulse, odd indices are waits,
  // even indices are pulses with alternating phase.
  std::vector<double> a_list = {0.5};

  void validate() const;
  double duration_pi_units() const;  // 2 sum_(i>=1) a_i + 2 a_0
  double power_pi_units() const;     // on-time only
  int sidebands() const;             // pulses on each side of the center

  static PulseShape rectangular() { return {}; }
  static PulseShape composite(std::vector<double> a);
};

struct SequenceSpec {
  double phi_rad = 0.5 * constants::pi;  // pi/2 standard, 3 pi/4 phase-offset
  double n = 3.0;                        // resonance index
  int repetitions = 1;                   // M
  double omega1_mhz = 10.5;              // Rabi frequency, ordinary
  double detuning_mhz = 0.0;
  PulseShape pulse;
  double tau_srt_us = 1500.0;            // protocol repetition period (bookkeeping)

  void validate() const;

  static SequenceSpec standard() { return {}; }
  static SequenceSpec phase_offset() {
    SequenceSpec s;
    s.phi_rad = 0.75 * constants::pi;
    return s;
  }
};

// tau = n pi / omega_I for ordinary Larmor frequency f_I: tau = n / (2 f_I).
double resonance_tau_us(double n, double nuclear_larmor_mhz);

struct Segment {
  double duration_us = 0.0;
  double phase_rad = 0.0;
  bool on = false;
};

// One 6-pulse block of total duration tau_us. Composite pulses expand
// symmetrically with alternating-phase sidebands and waits; the four free
// delays are padded so the block closes at exactly tau_us. Throws when the
// pi-pulse does not fit in tau/4.
std::vector<Segment> build_block(const SequenceSpec& spec, double tau_us);

// The block repeated M times.
std::vector<Segment> build_sequence(const SequenceSpec& spec, double tau_us);

struct SpinModel {
  enum class Kind { kReduced, kFullN14 };
  Kind kind = Kind::kReduced;

  // reduced model: NV pseudo-spin-1/2 x nuclear spin-1/2
  double a_zx_mhz = 0.080;
  double a_zy_mhz = 0.0;
  double a_zz_mhz = 0.0;
  double nuclear_larmor_mhz = 3.0723;  // 13C at 287 mT

  // full model: S = 1 NV at theta = pi/2 coupled to the 14N (I = 1)
  double d_mhz = 2869.0;
  double b_mt = 287.0;
  double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt;
  double n14_a_par_mhz = -2.14;   // Felton et al.
  double n14_a_perp_mhz = -2.70;
  double n14_quad_p_mhz = -4.95;

  void validate() const;
  int dimension() const { return kind == Kind::kReduced ? 4 : 6; }

  // Larmor frequency that converts the resonance index n into tau. The 14N
  // simulation still scans the tau values of the 13C protocol.
  double reference_larmor_mhz() const;

  static SpinModel reduced_c13(double a_zx_mhz, double a_zy_mhz, double larmor_mhz);
  static SpinModel full_n14(double b_mt, double d_mhz = 2869.0);
};

struct PropagationResult {
  std::vector<double> nv_polarization;       // index m = after m blocks
  std::vector<double> nuclear_polarization;  // <I_z>, normalized
};

// Initial state: NV in the driven lower level, nucleus maximally mixed.
Eigen::MatrixXcd initial_state(const SpinModel& model);

// Runs M blocks at tau = resonance_tau(n). rho0 must be a density matrix
// (Hermitian, unit trace, positive semidefinite within 1e-9).
PropagationResult propagate(const SpinModel& model, const SequenceSpec& spec,
                            const Eigen::MatrixXcd& rho0);

// Same, with an explicit block length.
PropagationResult propagate_at_tau(const SpinModel& model, const SequenceSpec& spec,
                                   double tau_us, const Eigen::MatrixXcd& rho0);

struct ScanResult {
  std::vector<double> x;
  std::vector<double> nv_polarization;
  std::vector<double> nuclear_polarization;
};

// Final NV / nuclear polarization after M blocks for each tau on the grid.
ScanResult scan_tau(const SpinModel& model, const SequenceSpec& spec, double tau_min_us,
                    double tau_max_us, int n_points);

// Same against the drive detuning, at tau = resonance_tau(spec.n).
ScanResult scan_detuning(const SpinModel& model, const SequenceSpec& spec,
                         double delta_min_mhz, double delta_max_mhz, int n_points);

// <sigma_z> after one composite pi pulse applied to the ground state, per
// detuning (-1 = perfect inversion).
std::vector<double> inversion_profile(const PulseShape& pulse, double omega1_mhz,
                                      const std::vector<double>& deltas_mhz);

// Width of the contiguous detuning interval around zero where the nuclear
// transfer stays above threshold * (transfer at zero detuning).
double transfer_bandwidth(const SpinModel& model, const SequenceSpec& spec,
                          double threshold, double span_mhz = 0.0, int n_points = 241);

struct N14Transition {
  int lower_level = 0;   // index within the s1 manifold
  int upper_level = 0;   // index within the s2 manifold
  double frequency_mhz = 0.0;
  double dipole = 0.0;   // |nuclear overlap|, 1 = fully allowed
  bool allowed = false;
};

// Microwave transitions between the s1 and s2 manifolds of the NV-14N system
// at tilt theta (pi/2 reproduces the powder working point).
std::vector<N14Transition> list_transitions_n14(double b_mt, double d_mhz,
                                                double a_par_mhz, double a_perp_mhz,
                                                double quad_p_mhz,
                                                double theta_rad = 0.5 * constants::pi,
                                                double dipole_threshold = 0.1);

}  // namespace nvdnp
