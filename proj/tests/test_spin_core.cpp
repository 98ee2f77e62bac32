#include "doctest.h"

#include <cmath>
#include <random>

#include "nvdnp/spin_core.hpp"

using namespace nvdnp;

namespace {

// Paper operating point: X band, 2 um sample fit.
constexpr double kD = 2869.0;     // MHz
constexpr double kB287 = 287.0;   // mT
constexpr double kNu = 9600.0;    // MHz

NvSystem paper_system() {
  NvSystem sys;
  sys.d_mhz = kD;
  return sys;
}

EigenSolution solve_at(double b_mt, double theta, double phi = 0.0) {
  return diagonalize(build_hamiltonian(paper_system(), {b_mt, theta, phi}));
}

}  // namespace

TEST_CASE("spin-1 operators obey the angular momentum algebra") {
  const auto& sx = spin1_sx();
  const auto& sy = spin1_sy();
  const auto& sz = spin1_sz();
  const Eigen::Matrix3cd comm = sx * sy - sy * sx;
  CHECK((comm - std::complex<double>(0, 1) * sz).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((sx * sx + sy * sy + sz * sz - 2.0 * Eigen::Matrix3cd::Identity())
            .cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zero-field Hamiltonian is diag(D, 0, D)") {
  NvSystem sys;
  sys.d_mhz = 2870.0;
  const auto h = build_hamiltonian(sys, {0.0, 0.0, 0.0});
  Eigen::Matrix3cd expected = Eigen::Matrix3cd::Zero();
  expected(0, 0) = 2870.0;
  expected(2, 2) = 2870.0;
  CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("perpendicular eigenvalues match the analytic triple") {
  const auto sol = solve_at(kB287, constants::pi / 2);
  const auto u = perp_energies_analytic(kD, kB287);
  const double scale = std::abs(u.u3);
  CHECK(std::abs(sol.energies_mhz[0] - u.u1) < 1e-9 * scale);
  CHECK(std::abs(sol.energies_mhz[1] - u.u2) < 1e-9 * scale);
  CHECK(std::abs(sol.energies_mhz[2] - u.u3) < 1e-9 * scale);
  CHECK(sol.energies_mhz[1] == doctest::Approx(kD).epsilon(1e-12));
}

TEST_CASE("aligned field near the level anticrossing") {
  const double b = 102.4;  // mT
  const auto sol = solve_at(b, 0.0);
  const double gap = sol.energies_mhz[2] - sol.energies_mhz[0];
  CHECK(gap == doctest::Approx(2.0 * constants::nv_gamma_mhz_per_mt * b).epsilon(1e-9));
}

TEST_CASE("diagonalize handles a diagonal matrix and rejects non-Hermitian input") {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 0) = 1.0; m(1, 1) = 2.0; m(2, 2) = 3.0;
  const auto sol = diagonalize(m);
  CHECK(sol.energies_mhz[0] == doctest::Approx(1.0));
  CHECK(sol.energies_mhz[2] == doctest::Approx(3.0));
  CHECK((sol.states - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  m(0, 1) = 1.0;  // no conjugate partner
  CHECK_THROWS_AS(diagonalize(m), std::invalid_argument);
}

TEST_CASE("spectral decomposition round trip on random Hermitian matrices") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix3cd a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = std::complex<double>(u(rng), u(rng));
    const Eigen::Matrix3cd h = 0.5 * (a + a.adjoint());
    const auto sol = diagonalize(h);

    Eigen::Matrix3cd rebuilt = Eigen::Matrix3cd::Zero();
    for (int i = 0; i < 3; ++i)
      rebuilt += sol.energies_mhz[i] * sol.states.col(i) * sol.states.col(i).adjoint();
    CHECK((rebuilt - h).cwiseAbs().maxCoeff() < 1e-10);

    // orthonormality and residual invariants
    CHECK((sol.states.adjoint() * sol.states - Eigen::Matrix3cd::Identity())
              .cwiseAbs().maxCoeff() < 1e-10);
    for (int i = 0; i < 3; ++i) {
      const double resid = (h * sol.states.col(i) -
                            sol.energies_mhz[i] * sol.states.col(i)).norm();
      CHECK(resid < 1e-9 * std::max(1.0, h.norm()));
    }
  }
}

TEST_CASE("mixing coefficients at the paper field") {
  const auto mix = mixing_coefficients(kD, kB287);
  CHECK(std::abs(mix.c - (-0.8375)) < 1e-3);
  CHECK(std::abs(mix.c_prime - 1.1941) < 1e-3);
  CHECK_THROWS_AS(mixing_coefficients(kD, 0.0), std::domain_error);
}

TEST_CASE("c * c' = -1 for any positive field") {
  for (double b : {1.0, 10.0, 102.4, 287.0, 1000.0, 12345.0}) {
    const auto mix = mixing_coefficients(kD, b);
    CHECK(std::abs(mix.c * mix.c_prime + 1.0) < 1e-12);
  }
}

TEST_CASE("analytic eigenstates agree with numeric diagonalization") {
  const auto analytic = perp_eigensolution(kD, kB287);
  const auto numeric = solve_at(kB287, constants::pi / 2);
  for (int i = 0; i < 3; ++i) {
    const double overlap = std::abs(numeric.states.col(i).dot(analytic.states.col(i)));
    CHECK(overlap > 1.0 - 1e-9);
  }
}

TEST_CASE("resonance fields reproduce the spectrum peak labels") {
  const auto rf = resonance_fields(kNu, kD);
  CHECK(rf.b12_mt == doctest::Approx(286.8).epsilon(2e-3));
  CHECK(rf.b23_mt == doctest::Approx(390.3).epsilon(2e-3));

  const auto free_electron = resonance_fields(kNu, 1e-12);
  CHECK(free_electron.b12_mt == doctest::Approx(kNu / constants::nv_gamma_mhz_per_mt));
  CHECK(free_electron.b23_mt == doctest::Approx(kNu / constants::nv_gamma_mhz_per_mt));

  CHECK_THROWS_AS(resonance_fields(2000.0, kD), std::domain_error);
}

TEST_CASE("dB12/dD value, limit and finite-difference oracle") {
  // -0.213 G/MHz = -0.0213 mT/MHz
  CHECK(db12_dd(kNu, kD) == doctest::Approx(-0.0213).epsilon(5e-3));

  CHECK(db12_dd(kNu, 1e-9) ==
        doctest::Approx(-1.0 / (2.0 * constants::nv_gamma_mhz_per_mt)).epsilon(1e-6));

  const double h = 1e-3;
  const double fd = (resonance_fields(kNu, kD + h).b12_mt -
                     resonance_fields(kNu, kD - h).b12_mt) / (2.0 * h);
  CHECK(db12_dd(kNu, kD) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("thermal shift rate and its linear inversion") {
  const auto rate = thermal_shift_rate(kNu, kD);
  CHECK(rate.dd_dt_mhz_per_k == doctest::Approx(-0.074));
  CHECK(rate.db_dt_mt_per_k * 10.0 == doctest::Approx(0.0158).epsilon(5e-3));  // G/K

  const double dt_for_0p8_gauss = 0.08 / rate.db_dt_mt_per_k;
  CHECK(dt_for_0p8_gauss == doctest::Approx(50.6).epsilon(5e-3));
  CHECK(0.0 / rate.db_dt_mt_per_k == doctest::Approx(0.0));
}

TEST_CASE("perturbed energies: tilt shift coefficient and numeric oracle") {
  const auto u0 = perp_energies_analytic(kD, kB287);
  const auto same = perturbed_energies(kD, kB287, 0.0);
  CHECK(same.u1 == doctest::Approx(u0.u1));
  CHECK(same.u2 == doctest::Approx(u0.u2));
  CHECK(same.u3 == doctest::Approx(u0.u3));

  CHECK(tilt_shift_coefficient(kD, kB287) == doctest::Approx(4052.0).epsilon(0.01));

  const double delta = constants::pi / 180.0;  // 1 degree
  const auto up = perturbed_energies(kD, kB287, delta);
  const auto full = solve_at(kB287, constants::pi / 2 + delta);
  CHECK(std::abs(up.u1 - full.energies_mhz[0]) < 0.1);
  CHECK(std::abs(up.u2 - full.energies_mhz[1]) < 0.1);
  CHECK(std::abs(up.u3 - full.energies_mhz[2]) < 0.1);
}

TEST_CASE("second-order expansion error falls off like delta^4") {
  auto max_err = [](double delta) {
    const auto up = perturbed_energies(kD, kB287, delta);
    const auto full = solve_at(kB287, constants::pi / 2 + delta);
    return std::max({std::abs(up.u1 - full.energies_mhz[0]),
                     std::abs(up.u2 - full.energies_mhz[1]),
                     std::abs(up.u3 - full.energies_mhz[2])});
  };
  const double e2 = max_err(2.0 * constants::pi / 180.0);
  const double e1 = max_err(1.0 * constants::pi / 180.0);
  CHECK(e2 / e1 >= 8.0);
}

TEST_CASE("tilt acceptance reproduces delta_M and stays self-consistent") {
  const double delta_m = tilt_acceptance(15.0, kD, kB287);
  CHECK(delta_m == doctest::Approx(0.0608).epsilon(0.01));
  CHECK(tilt_acceptance(1e-12, kD, kB287) < 1e-6);

  // at delta_M the transition has moved by exactly the window width
  const auto u0 = perp_energies_analytic(kD, kB287);
  const auto um = perturbed_energies(kD, kB287, delta_m);
  const double shift = std::abs((um.u2 - um.u1) - (u0.u2 - u0.u1));
  CHECK(shift == doctest::Approx(15.0).epsilon(0.02));
}

TEST_CASE("transition dipoles: forbidden aligned transition and 90-degree closed form") {
  // aligned NV: |-1> <-> |+1> is a double-quantum transition, dipole zero
  const auto aligned = solve_at(150.0, 0.0);
  const auto d13 = transition_dipole(aligned, 0, 2, Eigen::Vector3d::UnitY());
  CHECK(std::abs(d13) < 1e-9);

  const auto sol = perp_eigensolution(kD, kB287);
  const auto mix = mixing_coefficients(kD, kB287);
  const double expected = std::abs(mix.c) / std::sqrt(1.0 + mix.c * mix.c);
  const auto d12 = transition_dipole(sol, 0, 1, Eigen::Vector3d::UnitZ());
  CHECK(std::abs(d12) == doctest::Approx(expected).epsilon(1e-9));

  // closed form d12 = (c cos(phi) + i sin(phi)) / sqrt(1 + c^2) up to a phase
  for (double phi : {0.1, 0.7, 1.3, 2.2}) {
    const Eigen::Vector3d n(0.0, std::sin(phi), std::cos(phi));
    const auto d = transition_dipole(sol, 0, 1, n);
    const double mag = std::hypot(mix.c * std::cos(phi), std::sin(phi)) /
                       std::sqrt(1.0 + mix.c * mix.c);
    CHECK(std::abs(d) == doctest::Approx(mag).epsilon(1e-9));
  }

  CHECK_THROWS_AS(transition_dipole(sol, 0, 0, Eigen::Vector3d::UnitZ()),
                  std::invalid_argument);
  CHECK_THROWS_AS(transition_dipole(sol, 0, 1, Eigen::Vector3d(0, 0, 2)),
                  std::invalid_argument);
}

TEST_CASE("Rabi inhomogeneity window at the paper field") {
  const auto sol = perp_eigensolution(kD, kB287);
  double lo = 1e9, hi = -1e9;
  for (int k = 0; k <= 200; ++k) {
    const double phi = k * constants::pi / 200.0;
    const Eigen::Vector3d n(0.0, std::sin(phi), std::cos(phi));
    const double ratio = std::sqrt(2.0) * std::abs(transition_dipole(sol, 0, 1, n));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo == doctest::Approx(0.91).epsilon(5e-3));
  CHECK(hi == doctest::Approx(1.08).epsilon(5e-3));
}

TEST_CASE("total dipole strength is invariant under rotations of the drive triad") {
  const auto sol = solve_at(kB287, 0.9, 0.4);
  auto total = [&](const Eigen::Matrix3d& basis) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (i != j) s += std::norm(transition_dipole(sol, i, j, basis.col(k)));
    return s;
  };
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(0.83, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
  CHECK(total(id) == doctest::Approx(total(rot)).epsilon(1e-10));
}

TEST_CASE("thermal populations: limits and the printed population difference") {
  const auto sol = solve_at(kB287, constants::pi / 2);

  const auto hot = thermal_populations(sol, 1e12);
  for (double p : hot.p) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  // B = 286.0 mT, T = 293 K
  const auto cold = thermal_populations(solve_at(286.0, constants::pi / 2), 293.0);
  const double drho = cold.p[0] - cold.p[1];
  CHECK(std::abs(drho - 5.234e-4) < 1e-6);

  EigenSolution degenerate;  // all energies zero
  const auto flat = thermal_populations(degenerate, 293.0);
  for (double p : flat.p) CHECK(p == doctest::Approx(1.0 / 3.0));

  double sum = 0.0;
  for (double p : cold.p) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pumped populations: limits, affinity, occupation-circle value") {
  const auto sol = solve_at(kB287, constants::pi / 2);

  const auto th = thermal_populations(sol, 293.0);
  const auto p0 = pumped_populations(0.0, sol, 293.0);
  for (int i = 0; i < 3; ++i) CHECK(p0.p[i] == doctest::Approx(th.p[i]));

  // fully pumped aligned NV sits entirely in m_s = 0
  const auto aligned = solve_at(150.0, 0.0);
  const auto pumped = pumped_populations(1.0, aligned, 293.0);
  for (int i = 0; i < 3; ++i) {
    const double w0 = std::norm(aligned.states(1, i));
    CHECK(pumped.p[i] == doctest::Approx(w0).epsilon(1e-12));
  }

  // affinity in p_nv
  const auto pa = pumped_populations(0.3, sol, 293.0);
  const auto p1 = pumped_populations(1.0, sol, 293.0);
  for (int i = 0; i < 3; ++i)
    CHECK(pa.p[i] == doctest::Approx(0.7 * p0.p[i] + 0.3 * p1.p[i]).epsilon(1e-12));

  // rho(s1) at p_nv = 0.3 matches the mixing-coefficient construction
  const auto mix = mixing_coefficients(kD, kB287);
  const double expected = 0.7 * th.p[0] + 0.3 / (1.0 + mix.c * mix.c);
  CHECK(pa.p[0] == doctest::Approx(expected).epsilon(1e-6));

  double sum = 0.0;
  for (double p : pa.p) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("population difference from the NV enhancement factor") {
  const auto sol = solve_at(286.0, constants::pi / 2);
  CHECK(delta_rho_from_enhancement(46.0, sol, 293.0) == doctest::Approx(0.024).epsilon(0.01));
  CHECK(delta_rho_from_enhancement(61.0, sol, 293.0) == doctest::Approx(0.032).epsilon(0.01));

  const auto th = thermal_populations(sol, 293.0);
  CHECK(delta_rho_from_enhancement(1.0, sol, 293.0) ==
        doctest::Approx(th.p[0] - th.p[1]).epsilon(1e-12));
}
