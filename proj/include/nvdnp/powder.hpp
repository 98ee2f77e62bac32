#pragma once

#include <vector>

#include "nvdnp/spin_core.hpp"

// Orientation-averaged EPR spectra under thermal or optically pumped
// populations, transition-frequency distributions, the addressed-fraction
// calculation for a finite excitation bandwidth, and the illumination
// heating analysis.

namespace nvdnp {

struct BroadeningModel {
  double lorentz_lw_mt = 0.0;  // Lorentzian full width, field units
  double ex_fwhm_mhz = 0.0;    // Gaussian FWHM of the e_x distribution

  void validate() const;
};

enum class SweepMode { kField, kFrequency };

struct SpectrumRequest {
  SweepMode mode = SweepMode::kField;
  double fixed_nu_mhz = 9600.0;  // microwave frequency (field sweeps)
  double fixed_b_mt = 287.0;     // static field (frequency sweeps)
  double axis_min = 250.0;
  double axis_max = 450.0;
  int n_points = 1001;
  double p_nv = 0.0;
  double temperature_k = 293.0;
  int n_theta = 121;
  int n_phi = 4;
  int n_strain = 1;
  unsigned long seed = 0;  // echoed in metadata; the quadrature itself is deterministic

  void validate() const;
};

struct SpectrumMetadata {
  SpectrumRequest request;
  int skipped_transitions = 0;
};

struct Spectrum {
  std::vector<double> axis;       // mT or MHz depending on the request
  std::vector<double> intensity;  // arbitrary units, per axis unit
  SpectrumMetadata meta;
};

struct Orientation {
  double theta_rad = 0.0;
  double phi_rad = 0.0;
  double weight = 1.0;
};

// sin(theta)-weighted midpoint grid on theta in [0, pi/2] (the Hamiltonian is
// symmetric under theta -> pi - theta), phi uniform on [0, 2 pi). Weights sum
// to one.
std::vector<Orientation> orientation_grid(int n_theta, int n_phi);

// Gauss-Hermite nodes/weights for averaging over a normal distribution with
// the given mean and FWHM; weights sum to one.
struct StrainNode {
  double ex_mhz = 0.0;
  double weight = 1.0;
};
std::vector<StrainNode> strain_nodes(int n, double mean_mhz, double fwhm_mhz);

Spectrum simulate_spectrum(const NvSystem& sys, const SpectrumRequest& req,
                           const BroadeningModel& br);

struct FreqDistOptions {
  double axis_min_mhz = 0.0;  // auto when min >= max
  double axis_max_mhz = 0.0;
  int n_points = 1201;
  int n_theta = 361;
  int n_phi = 1;
  int n_strain = 1;
};

// Histogram of the two main transition frequencies over the powder, equal
// weight per transition, no dipole weighting.
Spectrum frequency_distribution(const NvSystem& sys, double b_mt,
                                const BroadeningModel& br,
                                const FreqDistOptions& opts = {});

struct FractionOptions {
  int n_theta = 2001;
  int n_phi = 16;
  int n_strain = 7;
  int carrier_scan_points = 361;
};

struct BandwidthFractions {
  double f12 = 0.0;          // powder weight of s1->s2 inside the window
  double f23 = 0.0;          // same for s2->s3
  double carrier_mhz = 0.0;  // carrier actually used
};

// Fraction of the powder whose transition frequency falls inside
// [carrier - delta_pol/2, carrier + delta_pol/2] at static field b_mt.
// carrier_mhz <= 0 selects the carrier that maximizes f12.
BandwidthFractions bandwidth_fraction(const NvSystem& sys, double carrier_mhz,
                                      double b_mt, double delta_pol_mhz,
                                      const BroadeningModel& br,
                                      const FractionOptions& opts = {});

struct HeatingPoint {
  double laser_power_mw = 0.0;
  double b_peak_mt = 0.0;
};

struct HeatingResult {
  double rate_k_per_mw = 0.0;
  double delta_t(double power_mw) const { return rate_k_per_mw * power_mw; }
};

// Recovers D from each low-field peak position, converts to a temperature via
// dD/dT and fits a line against laser power. Needs >= 2 distinct powers.
HeatingResult heating_analysis(const std::vector<HeatingPoint>& points, double nu_mhz,
                               double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

// Forward model for the heating round trip: peak position at a given power.
double heated_peak_position(double power_mw, double rate_k_per_mw, double d0_mhz,
                            double nu_mhz,
                            double gamma_mhz_per_mt = constants::nv_gamma_mhz_per_mt);

}  // namespace nvdnp
