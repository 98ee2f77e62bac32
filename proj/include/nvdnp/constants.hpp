#pragma once

// Physical constants (CODATA, 6 significant figures) and unit helpers.
// Internal unit convention throughout the library:
//   energies / frequencies : MHz (ordinary frequency)
//   magnetic fields        : mT
//   time                   : microseconds
// Angular frequencies (2*pi*f) appear only inside propagators.

namespace nvdnp::constants {

inline constexpr double pi = 3.14159265358979323846;

inline constexpr double planck_h = 6.62607e-34;    // J s
inline constexpr double boltzmann_kb = 1.38065e-23; // J / K
inline constexpr double avogadro_na = 6.02214e23;   // 1 / mol

// h * (1 MHz) / k_B, in kelvin: converts a MHz level splitting into an
// equivalent temperature for Boltzmann weights.
inline constexpr double mhz_to_kelvin = planck_h * 1e6 / boltzmann_kb;

// NV electron gyromagnetic ratio, ordinary frequency per field.
inline constexpr double nv_gamma_mhz_per_mt = 28.032; // = 2.8032 MHz/G

// Temperature coefficient of the NV zero-field splitting (Acosta et al.).
inline constexpr double nv_dd_dt_mhz_per_k = -0.074;

// 13C nuclear gyromagnetic ratio.
inline constexpr double c13_gamma_mhz_per_t = 10.705;

// 1H nuclear gyromagnetic ratio.
inline constexpr double h1_gamma_mhz_per_t = 42.576;

// Carbon atom density of diamond, cm^-3 (for ppm -> cm^-3 conversions).
inline constexpr double diamond_atom_density_cm3 = 1.76e23;

} // namespace nvdnp::constants
