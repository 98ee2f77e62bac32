#include "nvdnp/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nvdnp/spin_core.hpp"

namespace nvdnp {

namespace {

using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using std::complex;

const complex<double> I1(0.0, 1.0);

Matrix2cd pauli_x() { Matrix2cd m; m << 0, 1, 1, 0; return m; }
Matrix2cd pauli_y() { Matrix2cd m; m << 0, -I1, I1, 0; return m; }
Matrix2cd pauli_z() { Matrix2cd m; m << 1, 0, 0, -1; return m; }

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// exp(-i 2 pi H t) for Hermitian H in MHz, t in us.
MatrixXcd segment_unitary(const MatrixXcd& h, double t_us) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  const auto& evals = es.eigenvalues();
  MatrixXcd phases = MatrixXcd::Zero(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    phases(k, k) = std::exp(-I1 * (2.0 * constants::pi * evals(k) * t_us));
  return es.eigenvectors() * phases * es.eigenvectors().adjoint();
}

void check_density_matrix(const Eigen::MatrixXcd& rho, int dim) {
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("propagate: density matrix has the wrong dimension");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("propagate: density matrix is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9)
    throw std::invalid_argument("propagate: density matrix trace must be one");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("propagate: density matrix is not positive semidefinite");
}

// Rotating-frame Hamiltonians of the driven system. `drive` carries the
// pulse's phase-dependent part scaled by Omega/2; `off` is the always-on part.
struct FrameOperators {
  MatrixXcd off;                               // detuning + nuclear + hyperfine
  MatrixXcd sx, sy;                            // pseudo-spin drive quadratures
  MatrixXcd nv_projector;                      // initial NV level projector
  MatrixXcd nuclear_iz;                        // normalized nuclear polarization
};

FrameOperators reduced_frame(const SpinModel& m, double detuning_mhz) {
  const Matrix2cd id2 = Matrix2cd::Identity();
  const Matrix2cd sz = pauli_z();
  FrameOperators f;
  // H = Delta Sz_eff + f_I I_z + 2 Sz_eff (A_zx I_x + A_zy I_y + A_zz I_z)
  f.off = detuning_mhz * 0.5 * kron(sz, id2) +
          m.nuclear_larmor_mhz * kron(id2, 0.5 * pauli_z()) +
          kron(sz, m.a_zx_mhz * 0.5 * pauli_x() + m.a_zy_mhz * 0.5 * pauli_y() +
                       m.a_zz_mhz * 0.5 * pauli_z());
  f.sx = kron(0.5 * pauli_x(), id2);
  f.sy = kron(0.5 * pauli_y(), id2);
  Matrix2cd up = Matrix2cd::Zero();
  up(0, 0) = 1.0;
  f.nv_projector = kron(up, id2);
  f.nuclear_iz = kron(id2, pauli_z());  // 2 <I_z>
  return f;
}

// Conditional nuclear Hamiltonians of the NV-14N system for the two driven NV
// levels; the carrier sits on the m_I = 0 line (bare s1 -> s2 frequency).
struct N14Blocks {
  Eigen::Matrix3cd h1, h2;  // nuclear blocks in the s1 / s2 manifolds
};

N14Blocks n14_blocks(const SpinModel& m, double theta_rad) {
  const NvSystem sys{m.d_mhz, 0.0, 0.0, m.gamma_mhz_per_mt};
  const auto sol = diagonalize(build_hamiltonian(sys, {m.b_mt, theta_rad, 0.0}));

  const Eigen::Matrix3cd& ix = spin1_sx();
  const Eigen::Matrix3cd& iy = spin1_sy();
  const Eigen::Matrix3cd& iz = spin1_sz();
  const Eigen::Matrix3cd quad =
      m.n14_quad_p_mhz * (iz * iz - (2.0 / 3.0) * Eigen::Matrix3cd::Identity());

  auto block = [&](int level) {
    const Eigen::Vector3cd s = sol.states.col(level);
    const double kx = (s.dot(spin1_sx() * s)).real();
    const double ky = (s.dot(spin1_sy() * s)).real();
    const double kz = (s.dot(spin1_sz() * s)).real();
    return Eigen::Matrix3cd(quad + m.n14_a_perp_mhz * (kx * ix + ky * iy) +
                            m.n14_a_par_mhz * kz * iz);
  };
  return {block(0), block(1)};
}

FrameOperators full_n14_frame(const SpinModel& m, double detuning_mhz) {
  const auto blocks = n14_blocks(m, 0.5 * constants::pi);
  const Matrix2cd id2 = Matrix2cd::Identity();
  const Eigen::Matrix3cd id3 = Eigen::Matrix3cd::Identity();

  FrameOperators f;
  f.off = MatrixXcd::Zero(6, 6);
  f.off.topLeftCorner(3, 3) = blocks.h1;
  f.off.bottomRightCorner(3, 3) = blocks.h2 - detuning_mhz * id3;
  f.sx = kron(0.5 * pauli_x(), id3);
  f.sy = kron(0.5 * pauli_y(), id3);
  Matrix2cd up = Matrix2cd::Zero();
  up(0, 0) = 1.0;
  f.nv_projector = kron(up, id3);
  f.nuclear_iz = kron(id2, spin1_sz());  // <I_z>, already in [-1, 1]
  return f;
}

FrameOperators make_frame(const SpinModel& m, double detuning_mhz) {
  return m.kind == SpinModel::Kind::kReduced ? reduced_frame(m, detuning_mhz)
                                             : full_n14_frame(m, detuning_mhz);
}

MatrixXcd block_unitary(const FrameOperators& f, const std::vector<Segment>& block,
                        double omega1_mhz) {
  MatrixXcd u = MatrixXcd::Identity(f.off.rows(), f.off.cols());
  for (const Segment& seg : block) {
    if (seg.duration_us <= 0.0) continue;
    MatrixXcd h = f.off;
    if (seg.on)
      h += omega1_mhz * (std::cos(seg.phase_rad) * f.sx + std::sin(seg.phase_rad) * f.sy);
    u = segment_unitary(h, seg.duration_us) * u;
  }
  return u;
}

// Deterministic eigenbasis of a possibly degenerate Hermitian matrix: inside
// each degenerate group the basis is fixed by the restriction of `resolver`
// (and of I_x^2 as a fallback).
Eigen::Matrix3cd resolved_eigenbasis(const Eigen::Matrix3cd& h,
                                     const Eigen::Matrix3cd& resolver,
                                     Eigen::Vector3d* energies) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h);
  Eigen::Matrix3cd basis = es.eigenvectors();
  const Eigen::Vector3d evals = es.eigenvalues().real();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());

  const Eigen::Matrix3cd ix2 = spin1_sx() * spin1_sx();
  for (int start = 0; start < 3;) {
    int end = start + 1;
    while (end < 3 && std::abs(evals(end) - evals(start)) < 1e-9 * scale) ++end;
    const int size = end - start;
    if (size > 1) {
      for (const Eigen::Matrix3cd& res : {resolver, ix2}) {
        Eigen::MatrixXcd sub = basis.middleCols(start, size);
        Eigen::MatrixXcd restricted = sub.adjoint() * res * sub;
        if ((restricted - restricted(0, 0) * Eigen::MatrixXcd::Identity(size, size))
                .cwiseAbs().maxCoeff() > 1e-9) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> rs(restricted);
          basis.middleCols(start, size) = sub * rs.eigenvectors();
          break;
        }
      }
    }
    start = end;
  }
  if (energies) *energies = evals;
  return basis;
}

}  // namespace

void PulseShape::validate() const {
  if (a_list.empty()) throw std::invalid_argument("PulseShape: a_list must be nonempty");
  for (double a : a_list)
    if (a < 0.0) throw std::invalid_argument("PulseShape: durations must be nonnegative");
  if (kind == Kind::kRectangular &&
      (a_list.size() != 1 || std::abs(a_list[0] - 0.5) > 1e-12))
    throw std::invalid_argument("PulseShape: rectangular means a_list = [0.5]");
  if (kind == Kind::kPhaseAlternating && a_list.size() % 2 == 0)
    throw std::invalid_argument("PulseShape: phase-alternating a_list must have odd length");
}

double PulseShape::duration_pi_units() const {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < a_list.size(); ++k) sum += a_list[k];
  return 2.0 * sum + 2.0 * a_list.back();
}

double PulseShape::power_pi_units() const {
  // a_list = [a_n, ..., a_1, a_0]: element k carries index i = n - k;
  // even i are pulses, odd i are waits.
  const int n = static_cast<int>(a_list.size()) - 1;
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    if ((n - k) % 2 == 0) sum += a_list[k];
  return 2.0 * sum + 2.0 * a_list.back();
}

int PulseShape::sidebands() const { return (static_cast<int>(a_list.size()) - 1 + 1) / 2; }

PulseShape PulseShape::composite(std::vector<double> a) {
  PulseShape p;
  p.kind = a.size() == 1 ? Kind::kRectangular : Kind::kPhaseAlternating;
  p.a_list = std::move(a);
  p.validate();
  return p;
}

void SequenceSpec::validate() const {
  if (repetitions < 1) throw std::invalid_argument("SequenceSpec: M must be >= 1");
  if (!(omega1_mhz > 0.0))
    throw std::invalid_argument("SequenceSpec: Rabi frequency must be positive");
  if (!(n > 0.0)) throw std::invalid_argument("SequenceSpec: resonance index must be positive");
  pulse.validate();
}

double resonance_tau_us(double n, double nuclear_larmor_mhz) {
  if (!(n > 0.0) || !(nuclear_larmor_mhz > 0.0))
    throw std::invalid_argument("resonance_tau: n and the Larmor frequency must be positive");
  return n / (2.0 * nuclear_larmor_mhz);
}

namespace {

// Composite pulse expansion. flank < 0: opening pi/2 (outer -> half center);
// flank > 0: closing pi/2 (half center -> outer); flank = 0: full pi pulse.
void append_composite(std::vector<Segment>& out, const PulseShape& pulse, double base_phase,
                      double t_pi_us, int flank) {
  const int n = static_cast<int>(pulse.a_list.size()) - 1;
  auto phase_of = [&](int i) {
    // center positive, then alternating sign outward over the even entries
    return ((i / 2) % 2 == 0) ? base_phase : base_phase + constants::pi;
  };
  auto emit = [&](int i, double scale) {
    const double t = pulse.a_list[static_cast<std::size_t>(n - i)] * t_pi_us * scale;
    const bool on = (i % 2 == 0);
    if (t > 0.0) out.push_back({t, on ? phase_of(i) : 0.0, on});
  };

  if (flank <= 0)
    for (int i = n; i >= 1; --i) emit(i, 1.0);
  emit(0, flank == 0 ? 2.0 : 1.0);
  if (flank >= 0)
    for (int i = 1; i <= n; ++i) emit(i, 1.0);
}

}  // namespace

std::vector<Segment> build_block(const SequenceSpec& spec, double tau_us) {
  spec.validate();
  if (!(tau_us > 0.0)) throw std::invalid_argument("build_block: tau must be positive");

  const double t_pi = 1.0 / (2.0 * spec.omega1_mhz);  // rectangular pi time, us
  const double pi_len = spec.pulse.duration_pi_units() * t_pi;
  const double wait = 0.25 * tau_us - pi_len;
  if (wait < -1e-12) {
    std::ostringstream msg;
    msg << "build_block: pi pulse of " << pi_len << " us does not fit in tau/4 = "
        << 0.25 * tau_us << " us";
    throw std::invalid_argument(msg.str());
  }

  std::vector<Segment> block;
  auto add_wait = [&] { if (wait > 0.0) block.push_back({wait, 0.0, false}); };
  auto half_block = [&](double base) {
    append_composite(block, spec.pulse, base, t_pi, -1);                  // opening pi/2
    add_wait();
    append_composite(block, spec.pulse, base + 0.5 * constants::pi, t_pi, 0);  // pi
    add_wait();
    append_composite(block, spec.pulse, base, t_pi, +1);                  // closing pi/2
  };
  half_block(0.0);
  half_block(spec.phi_rad);
  return block;
}

std::vector<Segment> build_sequence(const SequenceSpec& spec, double tau_us) {
  const auto block = build_block(spec, tau_us);
  std::vector<Segment> seq;
  seq.reserve(block.size() * spec.repetitions);
  for (int m = 0; m < spec.repetitions; ++m)
    seq.insert(seq.end(), block.begin(), block.end());
  return seq;
}

void SpinModel::validate() const {
  if (kind == Kind::kReduced && !(nuclear_larmor_mhz > 0.0))
    throw std::invalid_argument("SpinModel: nuclear Larmor frequency must be positive");
  if (kind == Kind::kFullN14) {
    if (!(d_mhz > 0.0) || !(b_mt > 0.0))
      throw std::invalid_argument("SpinModel: full model needs positive D and B");
  }
}

double SpinModel::reference_larmor_mhz() const {
  if (kind == Kind::kReduced) return nuclear_larmor_mhz;
  return constants::c13_gamma_mhz_per_t * b_mt * 1e-3;
}

SpinModel SpinModel::reduced_c13(double a_zx, double a_zy, double larmor) {
  SpinModel m;
  m.kind = Kind::kReduced;
  m.a_zx_mhz = a_zx;
  m.a_zy_mhz = a_zy;
  m.nuclear_larmor_mhz = larmor;
  return m;
}

SpinModel SpinModel::full_n14(double b_mt, double d_mhz) {
  SpinModel m;
  m.kind = Kind::kFullN14;
  m.b_mt = b_mt;
  m.d_mhz = d_mhz;
  return m;
}

Eigen::MatrixXcd initial_state(const SpinModel& model) {
  model.validate();
  const int nuc = model.kind == SpinModel::Kind::kReduced ? 2 : 3;
  MatrixXcd rho = MatrixXcd::Zero(2 * nuc, 2 * nuc);
  for (int k = 0; k < nuc; ++k) rho(k, k) = 1.0 / nuc;
  return rho;
}

PropagationResult propagate_at_tau(const SpinModel& model, const SequenceSpec& spec,
                                   double tau_us, const Eigen::MatrixXcd& rho0) {
  model.validate();
  spec.validate();
  check_density_matrix(rho0, model.dimension());

  const FrameOperators frame = make_frame(model, spec.detuning_mhz);
  const auto block = build_block(spec, tau_us);
  const MatrixXcd u = block_unitary(frame, block, spec.omega1_mhz);
  const MatrixXcd u_dag = u.adjoint();

  PropagationResult result;
  result.nv_polarization.reserve(spec.repetitions + 1);
  result.nuclear_polarization.reserve(spec.repetitions + 1);

  MatrixXcd rho = rho0;
  auto record = [&] {
    result.nv_polarization.push_back(2.0 * (frame.nv_projector * rho).trace().real() - 1.0);
    result.nuclear_polarization.push_back((frame.nuclear_iz * rho).trace().real());
  };
  record();
  for (int m = 0; m < spec.repetitions; ++m) {
    rho = u * rho * u_dag;
    record();
  }
  return result;
}

PropagationResult propagate(const SpinModel& model, const SequenceSpec& spec,
                            const Eigen::MatrixXcd& rho0) {
  return propagate_at_tau(model, spec, resonance_tau_us(spec.n, model.reference_larmor_mhz()),
                          rho0);
}

ScanResult scan_tau(const SpinModel& model, const SequenceSpec& spec, double tau_min_us,
                    double tau_max_us, int n_points) {
  if (!(tau_min_us < tau_max_us) || n_points < 2)
    throw std::invalid_argument("scan_tau: invalid grid");
  const MatrixXcd rho0 = initial_state(model);
  ScanResult scan;
  scan.x.resize(n_points);
  scan.nv_polarization.resize(n_points);
  scan.nuclear_polarization.resize(n_points);
  for (int k = 0; k < n_points; ++k) {
    const double tau = tau_min_us + (tau_max_us - tau_min_us) * k / (n_points - 1);
    scan.x[k] = tau;
    const auto r = propagate_at_tau(model, spec, tau, rho0);
    scan.nv_polarization[k] = r.nv_polarization.back();
    scan.nuclear_polarization[k] = r.nuclear_polarization.back();
  }
  return scan;
}

ScanResult scan_detuning(const SpinModel& model, const SequenceSpec& spec,
                         double delta_min_mhz, double delta_max_mhz, int n_points) {
  if (!(delta_min_mhz < delta_max_mhz) || n_points < 2)
    throw std::invalid_argument("scan_detuning: invalid grid");
  const MatrixXcd rho0 = initial_state(model);
  const double tau = resonance_tau_us(spec.n, model.reference_larmor_mhz());
  ScanResult scan;
  scan.x.resize(n_points);
  scan.nv_polarization.resize(n_points);
  scan.nuclear_polarization.resize(n_points);
  for (int k = 0; k < n_points; ++k) {
    SequenceSpec s = spec;
    s.detuning_mhz = delta_min_mhz + (delta_max_mhz - delta_min_mhz) * k / (n_points - 1);
    scan.x[k] = s.detuning_mhz;
    const auto r = propagate_at_tau(model, s, tau, rho0);
    scan.nv_polarization[k] = r.nv_polarization.back();
    scan.nuclear_polarization[k] = r.nuclear_polarization.back();
  }
  return scan;
}

std::vector<double> inversion_profile(const PulseShape& pulse, double omega1_mhz,
                                      const std::vector<double>& deltas_mhz) {
  pulse.validate();
  if (!(omega1_mhz > 0.0))
    throw std::invalid_argument("inversion_profile: Rabi frequency must be positive");

  const double t_pi = 1.0 / (2.0 * omega1_mhz);
  std::vector<Segment> segs;
  append_composite(segs, pulse, 0.0, t_pi, 0);

  std::vector<double> out;
  out.reserve(deltas_mhz.size());
  for (double delta : deltas_mhz) {
    Matrix2cd u = Matrix2cd::Identity();
    for (const Segment& seg : segs) {
      // closed-form SU(2) segment: rotation by 2 pi W t about (Omega_phi, Delta)
      const double wx = seg.on ? omega1_mhz * std::cos(seg.phase_rad) : 0.0;
      const double wy = seg.on ? omega1_mhz * std::sin(seg.phase_rad) : 0.0;
      const double w = std::sqrt(wx * wx + wy * wy + delta * delta);
      const double angle = constants::pi * w * seg.duration_us;  // = 2 pi (w/2) t
      Matrix2cd step = std::cos(angle) * Matrix2cd::Identity();
      if (w > 0.0)
        step -= I1 * (std::sin(angle) / w) *
                (wx * pauli_x() + wy * pauli_y() + delta * pauli_z());
      u = step * u;
    }
    out.push_back(std::norm(u(0, 0)) - std::norm(u(1, 0)));
  }
  return out;
}

double transfer_bandwidth(const SpinModel& model, const SequenceSpec& spec, double threshold,
                          double span_mhz, int n_points) {
  if (!(threshold > 0.0) || threshold > 1.0)
    throw std::invalid_argument("transfer_bandwidth: threshold must lie in (0, 1]");
  if (span_mhz <= 0.0) span_mhz = 1.5 * spec.omega1_mhz;
  if (n_points % 2 == 0) ++n_points;

  const auto scan = scan_detuning(model, spec, -span_mhz, span_mhz, n_points);
  const int center = n_points / 2;
  const double ref = scan.nuclear_polarization[center];
  if (ref == 0.0) return 0.0;

  int lo = center, hi = center;
  if (!(scan.nuclear_polarization[center] / ref >= threshold)) return 0.0;
  while (lo > 0 && scan.nuclear_polarization[lo - 1] / ref >= threshold) --lo;
  while (hi + 1 < n_points && scan.nuclear_polarization[hi + 1] / ref >= threshold) ++hi;
  return scan.x[hi] - scan.x[lo];
}

std::vector<N14Transition> list_transitions_n14(double b_mt, double d_mhz, double a_par_mhz,
                                                double a_perp_mhz, double quad_p_mhz,
                                                double theta_rad, double dipole_threshold) {
  SpinModel m = SpinModel::full_n14(b_mt, d_mhz);
  m.n14_a_par_mhz = a_par_mhz;
  m.n14_a_perp_mhz = a_perp_mhz;
  m.n14_quad_p_mhz = quad_p_mhz;

  const NvSystem sys{d_mhz, 0.0, 0.0, m.gamma_mhz_per_mt};
  const auto nv = diagonalize(build_hamiltonian(sys, {b_mt, theta_rad, 0.0}));
  const double bare = nv.energies_mhz[1] - nv.energies_mhz[0];

  const auto blocks = n14_blocks(m, theta_rad);
  Eigen::Vector3d e1, e2;
  const Eigen::Matrix3cd basis1 = resolved_eigenbasis(blocks.h1, blocks.h2, &e1);
  const Eigen::Matrix3cd basis2 = resolved_eigenbasis(blocks.h2, blocks.h1, &e2);

  std::vector<N14Transition> table;
  table.reserve(9);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      N14Transition t;
      t.lower_level = a;
      t.upper_level = b;
      t.frequency_mhz = bare + e2(b) - e1(a);
      t.dipole = std::abs(basis1.col(a).dot(basis2.col(b)));
      t.allowed = t.dipole >= dipole_threshold;
      table.push_back(t);
    }
  }
  std::sort(table.begin(), table.end(), [](const N14Transition& x, const N14Transition& y) {
    return x.frequency_mhz < y.frequency_mhz;
  });
  return table;
}

}  // namespace nvdnp
