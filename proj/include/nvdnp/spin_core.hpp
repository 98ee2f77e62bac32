#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "nvdnp/constants.hpp"

// Static NV ground-state spin Hamiltonian: construction, diagonalization and
// the closed-form results for a field perpendicular to the defect axis
// (energies, mixing coefficients, resonance fields, second-order tilt shifts,
// transition dipoles, thermal and optically pumped populations).

namespace nvdnp {

struct NvSystem {
  double d_mhz = 2870.0;  // zero-field splitting
  double ex_mhz = 0.0;    // strain / local-charge terms
  double ey_mhz = 0.0;
  double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt;

  void validate() const;
};

struct FieldVector {
  double b_mt = 0.0;
  double theta_rad = 0.0;  // angle between field and NV axis
  double phi_rad = 0.0;    // azimuth in the NV frame

  void validate() const;
};

// Ordered eigensystem of a 3x3 Hermitian spin Hamiltonian. States are the
// columns of `states`, expressed in the {|-1>, |0>, |+1>} basis.
struct EigenSolution {
  std::array<double, 3> energies_mhz{};
  Eigen::Matrix3cd states = Eigen::Matrix3cd::Identity();
};

// c, c' of the 90-degree eigenstates; c*c' = -1 for any B > 0.
struct MixingCoefficients {
  double c = 0.0;
  double c_prime = 0.0;
};

struct Populations {
  std::array<double, 3> p{};
};

struct PerpEnergies {
  double u1 = 0.0, u2 = 0.0, u3 = 0.0;  // MHz, ascending
};

struct ResonanceFields {
  double b12_mt = 0.0, b23_mt = 0.0;
};

struct ThermalShiftRate {
  double dd_dt_mhz_per_k = 0.0;
  double db_dt_mt_per_k = 0.0;
};

// Spin-1 operators in the {|-1>, |0>, |+1>} basis.
const Eigen::Matrix3cd& spin1_sx();
const Eigen::Matrix3cd& spin1_sy();
const Eigen::Matrix3cd& spin1_sz();

// H/h = D Sz^2 + gamma B.S + ex (Sy^2 - Sx^2) + ey (Sx Sy + Sy Sx), in MHz.
Eigen::Matrix3cd build_hamiltonian(const NvSystem& sys, const FieldVector& field);

// Ascending eigensystem; degenerate levels are ordered by their dominant
// |m_s> component and each state's largest component is made real positive.
// Throws std::invalid_argument if `h` is not Hermitian within 1e-12.
EigenSolution diagonalize(const Eigen::Matrix3cd& h);

// Energies for a field exactly perpendicular to the NV axis:
//   u1 = (D - sqrt(D^2 + (2 gamma B)^2))/2,  u2 = D,  u3 = (D + sqrt(...))/2.
PerpEnergies perp_energies_analytic(double d_mhz, double b_mt,
                                    double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// Throws std::domain_error for B = 0 (c is singular there).
MixingCoefficients mixing_coefficients(double d_mhz, double b_mt,
                                       double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// Eigenstates assembled from the mixing coefficients, same convention as
// diagonalize(): s1 and s3 mix |0> with (|-1>+|+1>)/sqrt2, s2 = (|+1>-|-1>)/sqrt2.
EigenSolution perp_eigensolution(double d_mhz, double b_mt,
                                 double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// Field-swept resonance positions of the two 90-degree transitions at fixed
// microwave frequency nu. Throws std::domain_error when nu <= D.
ResonanceFields resonance_fields(double nu_mhz, double d_mhz,
                                 double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// dB12/dD = -nu / (2 gamma sqrt(nu^2 - D nu)), in mT per MHz.
double db12_dd(double nu_mhz, double d_mhz,
               double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// (dD/dT, dB12/dT): the zero-field-splitting temperature coefficient
// -0.074 MHz/K combined with dB12/dD.
ThermalShiftRate thermal_shift_rate(double nu_mhz, double d_mhz,
                                    double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// Second-order coefficient k of the s1->s2 transition shift under a tilt
// delta away from 90 degrees: nu12(delta) = nu12(0) - k delta^2.
double tilt_shift_coefficient(double d_mhz, double b_mt,
                              double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// Energies under a tilt theta = pi/2 + delta, to second order in delta.
// Valid for |delta| <~ 0.2 rad.
PerpEnergies perturbed_energies(double d_mhz, double b_mt, double delta_rad,
                                double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// Largest tilt delta_M such that the s1->s2 shift stays within delta_pol:
// delta_M = sqrt(delta_pol / k).
double tilt_acceptance(double delta_pol_mhz, double d_mhz, double b_mt,
                       double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// d_ij = <s_i| n.S |s_j> for a unit drive direction n in the NV frame.
// Throws std::invalid_argument unless i != j and |n| = 1 within 1e-9.
std::complex<double> transition_dipole(const EigenSolution& sol, int i, int j,
                                       const Eigen::Vector3d& b1_direction);

// Boltzmann populations over the three eigenstates at temperature T.
Populations thermal_populations(const EigenSolution& sol, double temperature_k);

// rho_i = (1 - p_nv) rho_thermal,i + p_nv |<s_i|0>|^2.
Populations pumped_populations(double p_nv, const EigenSolution& sol, double temperature_k);

// (Delta rho)_NV = eps_nv * (rho_s1 - rho_s2)_thermal.
double delta_rho_from_enhancement(double eps_nv, const EigenSolution& sol,
                                  double temperature_k);

}  // namespace nvdnp
