#include "nvdnp/spin_core.hpp"

#include <cmath>
#include <stdexcept>

namespace nvdnp {

namespace {

using std::complex;
const complex<double> I1(0.0, 1.0);

Eigen::Matrix3cd make_sx() {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  const double r = 1.0 / std::sqrt(2.0);
  m(0, 1) = r; m(1, 0) = r;
  m(1, 2) = r; m(2, 1) = r;
  return m;
}

Eigen::Matrix3cd make_sy() {
  // basis {|-1>, |0>, |+1>}: <0|Sy|-1> = -i/sqrt2, <+1|Sy|0> = -i/sqrt2
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  const double r = 1.0 / std::sqrt(2.0);
  m(1, 0) = -I1 * r; m(0, 1) = I1 * r;
  m(2, 1) = -I1 * r; m(1, 2) = I1 * r;
  return m;
}

Eigen::Matrix3cd make_sz() {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 0) = -1.0;
  m(2, 2) = 1.0;
  return m;
}

int dominant_component(const Eigen::Vector3cd& v) {
  int k = 0;
  double best = std::norm(v(0));
  for (int m = 1; m < 3; ++m) {
    const double a = std::norm(v(m));
    if (a > best + 1e-15) { best = a; k = m; }
  }
  return k;
}

void fix_phase(Eigen::Vector3cd& v) {
  const int k = dominant_component(v);
  const double a = std::abs(v(k));
  if (a > 0.0) v *= std::conj(v(k)) / a;
}

}  // namespace

const Eigen::Matrix3cd& spin1_sx() { static const Eigen::Matrix3cd m = make_sx(); return m; }
const Eigen::Matrix3cd& spin1_sy() { static const Eigen::Matrix3cd m = make_sy(); return m; }
const Eigen::Matrix3cd& spin1_sz() { static const Eigen::Matrix3cd m = make_sz(); return m; }

void NvSystem::validate() const {
  if (!(d_mhz > 0.0)) throw std::invalid_argument("NvSystem: D must be positive");
  if (!(gamma_mhz_per_mt > 0.0))
    throw std::invalid_argument("NvSystem: gyromagnetic ratio must be positive");
}

void FieldVector::validate() const {
  if (b_mt < 0.0) throw std::invalid_argument("FieldVector: B must be nonnegative");
  if (theta_rad < 0.0 || theta_rad > constants::pi + 1e-12)
    throw std::invalid_argument("FieldVector: theta outside [0, pi]");
}

Eigen::Matrix3cd build_hamiltonian(const NvSystem& sys, const FieldVector& field) {
  sys.validate();
  field.validate();

  const Eigen::Matrix3cd& sx = spin1_sx();
  const Eigen::Matrix3cd& sy = spin1_sy();
  const Eigen::Matrix3cd& sz = spin1_sz();

  const double gb = sys.gamma_mhz_per_mt * field.b_mt;
  const double bx = gb * std::sin(field.theta_rad) * std::cos(field.phi_rad);
  const double by = gb * std::sin(field.theta_rad) * std::sin(field.phi_rad);
  const double bz = gb * std::cos(field.theta_rad);

  Eigen::Matrix3cd h = sys.d_mhz * (sz * sz) + bx * sx + by * sy + bz * sz;
  if (sys.ex_mhz != 0.0) h += sys.ex_mhz * (sy * sy - sx * sx);
  if (sys.ey_mhz != 0.0) h += sys.ey_mhz * (sx * sy + sy * sx);

  return Eigen::Matrix3cd(0.5 * (h + h.adjoint()));
}

EigenSolution diagonalize(const Eigen::Matrix3cd& h) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("diagonalize: matrix is not Hermitian within 1e-12");

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("diagonalize: eigensolver failed");

  EigenSolution sol;
  std::array<int, 3> order = {0, 1, 2};  // Eigen returns ascending already
  std::array<Eigen::Vector3cd, 3> vecs;
  for (int i = 0; i < 3; ++i) vecs[i] = solver.eigenvectors().col(order[i]);

  // Deterministic labeling inside degenerate groups: order by dominant m_s.
  const auto& evals = solver.eigenvalues();
  for (int i = 0; i < 2; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(evals(order[i]) - evals(order[j])) < 1e-9 * scale &&
          dominant_component(vecs[j]) < dominant_component(vecs[i])) {
        std::swap(order[i], order[j]);
        std::swap(vecs[i], vecs[j]);
      }
    }
  }

  for (int i = 0; i < 3; ++i) {
    sol.energies_mhz[i] = evals(order[i]);
    fix_phase(vecs[i]);
    sol.states.col(i) = vecs[i];
  }
  return sol;
}

PerpEnergies perp_energies_analytic(double d_mhz, double b_mt, double gamma_mhz_per_mt) {
  if (b_mt < 0.0) throw std::invalid_argument("perp_energies_analytic: B must be nonnegative");
  const double gb2 = 2.0 * gamma_mhz_per_mt * b_mt;
  const double root = std::sqrt(d_mhz * d_mhz + gb2 * gb2);
  return {0.5 * (d_mhz - root), d_mhz, 0.5 * (d_mhz + root)};
}

MixingCoefficients mixing_coefficients(double d_mhz, double b_mt, double gamma_mhz_per_mt) {
  const double gb = gamma_mhz_per_mt * b_mt;
  if (!(gb > 0.0))
    throw std::domain_error("mixing_coefficients: c is undefined at B = 0");
  const double half_d = 0.5 * d_mhz;
  const double root = std::sqrt(half_d * half_d + gb * gb);
  return {(half_d - root) / gb, (half_d + root) / gb};
}

EigenSolution perp_eigensolution(double d_mhz, double b_mt, double gamma_mhz_per_mt) {
  const auto u = perp_energies_analytic(d_mhz, b_mt, gamma_mhz_per_mt);
  const auto mix = mixing_coefficients(d_mhz, b_mt, gamma_mhz_per_mt);
  const double r = 1.0 / std::sqrt(2.0);

  EigenSolution sol;
  sol.energies_mhz = {u.u1, u.u2, u.u3};
  const double n1 = 1.0 / std::sqrt(1.0 + mix.c * mix.c);
  const double n3 = 1.0 / std::sqrt(1.0 + mix.c_prime * mix.c_prime);
  sol.states.setZero();
  sol.states.col(0) << n1 * mix.c * r, n1, n1 * mix.c * r;
  sol.states.col(1) << -r, 0.0, r;
  sol.states.col(2) << n3 * mix.c_prime * r, n3, n3 * mix.c_prime * r;
  return sol;
}

ResonanceFields resonance_fields(double nu_mhz, double d_mhz, double gamma_mhz_per_mt) {
  if (!(nu_mhz > d_mhz))
    throw std::domain_error("resonance_fields: B12 requires nu > D");
  return {std::sqrt(nu_mhz * (nu_mhz - d_mhz)) / gamma_mhz_per_mt,
          std::sqrt(nu_mhz * (nu_mhz + d_mhz)) / gamma_mhz_per_mt};
}

double db12_dd(double nu_mhz, double d_mhz, double gamma_mhz_per_mt) {
  if (!(nu_mhz > d_mhz)) throw std::domain_error("db12_dd: requires nu > D");
  return -nu_mhz / (2.0 * gamma_mhz_per_mt * std::sqrt(nu_mhz * nu_mhz - d_mhz * nu_mhz));
}

ThermalShiftRate thermal_shift_rate(double nu_mhz, double d_mhz, double gamma_mhz_per_mt) {
  const double dd_dt = constants::nv_dd_dt_mhz_per_k;
  return {dd_dt, db12_dd(nu_mhz, d_mhz, gamma_mhz_per_mt) * dd_dt};
}

double tilt_shift_coefficient(double d_mhz, double b_mt, double gamma_mhz_per_mt) {
  const double gb2 = 2.0 * gamma_mhz_per_mt * b_mt;
  const double root = std::sqrt(d_mhz * d_mhz + gb2 * gb2);
  // u2' - u1' = nu12 - [D + D/2 (1 - D/root)] delta^2
  return d_mhz + 0.5 * d_mhz * (1.0 - d_mhz / root);
}

PerpEnergies perturbed_energies(double d_mhz, double b_mt, double delta_rad,
                                double gamma_mhz_per_mt) {
  const auto u = perp_energies_analytic(d_mhz, b_mt, gamma_mhz_per_mt);
  const double gb2 = 2.0 * gamma_mhz_per_mt * b_mt;
  const double root = std::sqrt(d_mhz * d_mhz + gb2 * gb2);
  const double d2 = delta_rad * delta_rad;
  return {u.u1 + 0.5 * d_mhz * (1.0 - d_mhz / root) * d2,
          u.u2 - d_mhz * d2,
          u.u3 + 0.5 * d_mhz * (1.0 + d_mhz / root) * d2};
}

double tilt_acceptance(double delta_pol_mhz, double d_mhz, double b_mt,
                       double gamma_mhz_per_mt) {
  if (delta_pol_mhz < 0.0)
    throw std::invalid_argument("tilt_acceptance: delta_pol must be nonnegative");
  return std::sqrt(delta_pol_mhz / tilt_shift_coefficient(d_mhz, b_mt, gamma_mhz_per_mt));
}

std::complex<double> transition_dipole(const EigenSolution& sol, int i, int j,
                                       const Eigen::Vector3d& b1_direction) {
  if (i == j || i < 0 || j < 0 || i > 2 || j > 2)
    throw std::invalid_argument("transition_dipole: need two distinct state indices in 0..2");
  if (std::abs(b1_direction.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("transition_dipole: drive direction must be a unit vector");

  const Eigen::Matrix3cd op = b1_direction.x() * spin1_sx() +
                              b1_direction.y() * spin1_sy() +
                              b1_direction.z() * spin1_sz();
  return sol.states.col(i).dot(op * sol.states.col(j));
}

Populations thermal_populations(const EigenSolution& sol, double temperature_k) {
  if (!(temperature_k > 0.0))
    throw std::invalid_argument("thermal_populations: temperature must be positive");

  // Boltzmann weights on h*u_i/kT; reference to the lowest level for stability.
  const double beta = constants::mhz_to_kelvin / temperature_k;
  const double u0 = sol.energies_mhz[0];
  std::array<double, 3> w{};
  double z = 0.0;
  for (int i = 0; i < 3; ++i) {
    w[i] = std::exp(-(sol.energies_mhz[i] - u0) * beta);
    z += w[i];
  }
  Populations pop;
  for (int i = 0; i < 3; ++i) pop.p[i] = w[i] / z;
  return pop;
}

Populations pumped_populations(double p_nv, const EigenSolution& sol, double temperature_k) {
  if (p_nv < 0.0 || p_nv > 1.0)
    throw std::invalid_argument("pumped_populations: p_nv must lie in [0, 1]");
  const Populations th = thermal_populations(sol, temperature_k);
  Populations pop;
  for (int i = 0; i < 3; ++i) {
    const double overlap0 = std::norm(sol.states(1, i));  // |<s_i|0>|^2
    pop.p[i] = (1.0 - p_nv) * th.p[i] + p_nv * overlap0;
  }
  return pop;
}

double delta_rho_from_enhancement(double eps_nv, const EigenSolution& sol,
                                  double temperature_k) {
  if (!(eps_nv > 0.0))
    throw std::invalid_argument("delta_rho_from_enhancement: enhancement must be positive");
  const Populations th = thermal_populations(sol, temperature_k);
  return eps_nv * (th.p[0] - th.p[1]);
}

}  // namespace nvdnp
