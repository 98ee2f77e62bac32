#pragma once

#include <map>
#include <string>
#include <vector>

#include "nvdnp/constants.hpp"

// Fitting and derived-quantity calculus: stretched-exponential buildup and
// decay, the rotation-response model, the thermal-reference enhancement
// pipeline, protocol timing and the physical estimators.

namespace nvdnp {

struct TimeSeries {
  std::vector<double> t;      // seconds, or deg/s for the rotation response
  std::vector<double> y;
  std::vector<double> sigma;  // optional per-point uncertainty

  void validate(std::size_t min_points = 3) const;
};

enum class StretchedMode { kSaturation, kDecay };

struct FitResult {
  std::map<std::string, double> params;
  std::map<std::string, double> std_errors;
  double residual_norm = 0.0;
  bool converged = false;
};

// s(t) = A (1 - exp(-(t/T)^beta)) (saturation) or A exp(-(t/T)^beta) (decay).
// Damped least squares with analytic Jacobians, multi-start over beta.
FitResult fit_stretched_exp(const TimeSeries& series, StretchedMode mode);

// s(w) = s0 + a (1 - exp(-(w/w0)^beta)); requires >= 5 points including w = 0.
FitResult fit_rotation_response(const TimeSeries& series);

struct SampleSpec {
  double mass_mg = 0.0;
  double isotope_abundance = 0.0;  // fraction
  double molar_mass_g_per_mol = 0.0;
  double gamma_mhz_per_t = 0.0;
  int atoms_per_molecule = 1;

  void validate() const;
  double nuclei_count() const;
};

struct ProtocolTiming {
  double t_laser_us = 400.0;
  double tau_srt_us = 1500.0;
  int repetitions = 68;
  double laser_power_mw = 0.0;

  void validate() const;
};

// Gamma_ref = (gamma_13C N_13C) / (gamma_1H N_1H) from the sample properties.
double gamma_ref(const SampleSpec& diamond, const SampleSpec& reference);

// p_thermal = h gamma B / (2 k_B T), gamma in MHz/T, B in T.
double thermal_polarization(double b_t, double temperature_k, double gamma_mhz_per_t);

// p = p_thermal_detection * S_hp / (Gamma_ref * S_ref).
double absolute_polarization(double s_hp_uv, double s_ref_uv, double gamma_ref_value,
                             double p_thermal_detection);

double enhancement(double p_abs, double p_thermal_pol_field);

// Expected enhancement ratio (drho1 [NV]1) / (drho2 [NV]2).
double enhancement_ratio_model(double drho1, double conc1_ppm, double drho2,
                               double conc2_ppm);

// sqrt(D t) for D in cm^2/s and t in s, returned in nm.
double diffusion_length_nm(double d_spin_cm2_per_s, double t_s);

// r_NN = 0.55 n^(-1/3) for a ppm defect concentration in diamond.
double nn_distance_nm(double conc_ppm,
                      double lattice_density_cm3 = constants::diamond_atom_density_cm3);

struct TumblingResult {
  double d_r_per_s = 0.0;     // rotational diffusion coefficient
  double residence_ms = 0.0;  // time to diffuse out of the angle window
  long cycles = 0;            // polarization cycles inside the residence time
};

// Stokes-Einstein-Debye rotational diffusion for a particle of hydrodynamic
// radius r in a fluid of viscosity eta; residence time from the RMS diffusion
// angle delta = sqrt(2 D_r t).
TumblingResult tumbling(double radius_nm, double eta_pa_s, double temperature_k,
                        double angle_window_rad, double cycle_time_ms);

// Average laser power of the pulsed protocol.
double protocol_power_mw(const ProtocolTiming& timing, double peak_power_mw);

}  // namespace nvdnp
