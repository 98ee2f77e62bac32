#include "nvdnp/powder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvdnp/parallel.hpp"

namespace nvdnp {

namespace {

constexpr double kFwhmToSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

struct TransitionLine {
  int i = 0, j = 1;       // eigenstate indices, i < j
  double position = 0.0;  // axis units (mT or MHz)
  double weight = 0.0;
};

Eigen::Vector3d field_direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

// Average |<i| n.S |j>|^2 over drive directions perpendicular to the field.
double mean_perp_dipole_sq(const EigenSolution& sol, int i, int j,
                           const Eigen::Vector3d& b_dir) {
  Eigen::Vector3d e1 = Eigen::Vector3d::UnitZ().cross(b_dir);
  if (e1.norm() < 1e-12) e1 = Eigen::Vector3d::UnitX();
  e1.normalize();
  const Eigen::Vector3d e2 = b_dir.cross(e1).normalized();
  const double d1 = std::norm(transition_dipole(sol, i, j, e1));
  const double d2 = std::norm(transition_dipole(sol, i, j, e2));
  return 0.5 * (d1 + d2);
}

double transition_frequency(const NvSystem& sys, double b_mt, double theta, double phi,
                            int i, int j) {
  const auto sol = diagonalize(build_hamiltonian(sys, {b_mt, theta, phi}));
  return sol.energies_mhz[j] - sol.energies_mhz[i];
}

// All B in [b_lo, b_hi] with nu_ij(B) = target, by coarse bracketing plus
// bisection to 1e-4 mT.
std::vector<double> resonance_roots(const NvSystem& sys, double theta, double phi,
                                    int i, int j, double target_mhz, double b_lo,
                                    double b_hi) {
  constexpr int kCoarse = 32;
  std::vector<double> roots;
  double prev_b = b_lo;
  double prev_g = transition_frequency(sys, prev_b, theta, phi, i, j) - target_mhz;
  for (int k = 1; k <= kCoarse; ++k) {
    const double b = b_lo + (b_hi - b_lo) * k / kCoarse;
    const double g = transition_frequency(sys, b, theta, phi, i, j) - target_mhz;
    if (prev_g == 0.0) roots.push_back(prev_b);
    if ((prev_g < 0.0 && g > 0.0) || (prev_g > 0.0 && g < 0.0)) {
      double lo = prev_b, hi = b, glo = prev_g;
      while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        const double gm = transition_frequency(sys, mid, theta, phi, i, j) - target_mhz;
        if ((glo < 0.0) == (gm < 0.0)) { lo = mid; glo = gm; }
        else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_b = b;
    prev_g = g;
  }
  return roots;
}

void deposit_line(std::vector<double>& intensity, const std::vector<double>& axis,
                  double center, double weight, double lw_full) {
  if (weight == 0.0) return;
  if (lw_full <= 0.0) {
    // delta line into the nearest bin, kept as a density
    const double step = axis.size() > 1 ? axis[1] - axis[0] : 1.0;
    const auto it = std::min_element(axis.begin(), axis.end(), [&](double a, double b) {
      return std::abs(a - center) < std::abs(b - center);
    });
    intensity[static_cast<std::size_t>(it - axis.begin())] += weight / step;
    return;
  }
  const double hw = 0.5 * lw_full;
  const double norm = weight * hw / constants::pi;
  for (std::size_t k = 0; k < axis.size(); ++k) {
    const double dx = axis[k] - center;
    intensity[k] += norm / (dx * dx + hw * hw);
  }
}

double lorentz_window_probability(double center, double lo, double hi, double lw_full) {
  if (lw_full <= 0.0) return (center >= lo && center <= hi) ? 1.0 : 0.0;
  const double hw = 0.5 * lw_full;
  return (std::atan((hi - center) / hw) - std::atan((lo - center) / hw)) / constants::pi;
}

}  // namespace

void BroadeningModel::validate() const {
  if (lorentz_lw_mt < 0.0 || ex_fwhm_mhz < 0.0)
    throw std::invalid_argument("BroadeningModel: widths must be nonnegative");
}

void SpectrumRequest::validate() const {
  if (!(axis_min < axis_max))
    throw std::invalid_argument("SpectrumRequest: axis_min must be below axis_max");
  if (n_points < 2) throw std::invalid_argument("SpectrumRequest: n_points must be >= 2");
  if (n_theta < 1 || n_phi < 1 || n_strain < 1)
    throw std::invalid_argument("SpectrumRequest: grid sizes must be >= 1");
  if (p_nv < 0.0 || p_nv > 1.0)
    throw std::invalid_argument("SpectrumRequest: p_nv must lie in [0, 1]");
  if (!(temperature_k > 0.0))
    throw std::invalid_argument("SpectrumRequest: temperature must be positive");
}

std::vector<Orientation> orientation_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1)
    throw std::invalid_argument("orientation_grid: sizes must be >= 1");
  std::vector<Orientation> grid;
  grid.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  double total = 0.0;
  for (int t = 0; t < n_theta; ++t) {
    const double theta = (t + 0.5) * (0.5 * constants::pi) / n_theta;
    const double wt = std::sin(theta);
    for (int p = 0; p < n_phi; ++p) {
      const double phi = (p + 0.5) * (2.0 * constants::pi) / n_phi;
      grid.push_back({theta, phi, wt});
      total += wt;
    }
  }
  for (auto& o : grid) o.weight /= total;
  return grid;
}

std::vector<StrainNode> strain_nodes(int n, double mean_mhz, double fwhm_mhz) {
  if (n < 1) throw std::invalid_argument("strain_nodes: n must be >= 1");
  if (n == 1 || fwhm_mhz <= 0.0) return {{mean_mhz, 1.0}};

  // Golub-Welsch on the Hermite recurrence; weights are the squared first
  // components of the eigenvectors (already normalized to one).
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    const double off = std::sqrt(0.5 * (k + 1));
    jm(k, k + 1) = off;
    jm(k + 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jm);
  const double sigma = fwhm_mhz / kFwhmToSigma;
  std::vector<StrainNode> nodes(n);
  for (int k = 0; k < n; ++k) {
    nodes[k].ex_mhz = mean_mhz + std::sqrt(2.0) * sigma * solver.eigenvalues()(k);
    const double v0 = solver.eigenvectors()(0, k);
    nodes[k].weight = v0 * v0;
  }
  return nodes;
}

Spectrum simulate_spectrum(const NvSystem& sys, const SpectrumRequest& req,
                           const BroadeningModel& br) {
  sys.validate();
  req.validate();
  br.validate();

  Spectrum spec;
  spec.meta.request = req;
  spec.axis.resize(req.n_points);
  const double step = (req.axis_max - req.axis_min) / (req.n_points - 1);
  for (int k = 0; k < req.n_points; ++k) spec.axis[k] = req.axis_min + k * step;
  spec.intensity.assign(req.n_points, 0.0);

  const bool has_strain = br.ex_fwhm_mhz > 0.0 || sys.ex_mhz != 0.0 || sys.ey_mhz != 0.0;
  const int n_phi = has_strain ? req.n_phi : 1;
  const auto grid = orientation_grid(req.n_theta, n_phi);
  const auto strains = strain_nodes(req.n_strain, sys.ex_mhz, br.ex_fwhm_mhz);

  const double lw = req.mode == SweepMode::kField
                        ? br.lorentz_lw_mt
                        : br.lorentz_lw_mt * sys.gamma_mhz_per_mt;

  const std::size_t n_items = grid.size();
  const std::size_t n_chunks = chunk_count(n_items);
  std::vector<std::vector<double>> partial(n_chunks);
  std::vector<int> skipped(n_chunks, 0);

  parallel_chunks(n_items, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
    std::vector<double>& local = partial[chunk];
    local.assign(req.n_points, 0.0);
    for (std::size_t g = begin; g < end; ++g) {
      const Orientation& o = grid[g];
      const Eigen::Vector3d b_dir = field_direction(o.theta_rad, o.phi_rad);
      for (const StrainNode& s : strains) {
        NvSystem local_sys = sys;
        local_sys.ex_mhz = s.ex_mhz;
        local_sys.ey_mhz = 0.0;  // absorbed by the powder average
        const double w0 = o.weight * s.weight;

        std::vector<TransitionLine> lines;
        if (req.mode == SweepMode::kField) {
          for (const auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
            const auto roots = resonance_roots(local_sys, o.theta_rad, o.phi_rad, i, j,
                                               req.fixed_nu_mhz, req.axis_min, req.axis_max);
            if (roots.empty()) ++skipped[chunk];
            for (double b : roots) {
              const auto sol =
                  diagonalize(build_hamiltonian(local_sys, {b, o.theta_rad, o.phi_rad}));
              const auto pops = pumped_populations(req.p_nv, sol, req.temperature_k);
              const double dip = mean_perp_dipole_sq(sol, i, j, b_dir);
              lines.push_back({i, j, b, w0 * dip * (pops.p[i] - pops.p[j])});
            }
          }
        } else {
          const auto sol = diagonalize(
              build_hamiltonian(local_sys, {req.fixed_b_mt, o.theta_rad, o.phi_rad}));
          const auto pops = pumped_populations(req.p_nv, sol, req.temperature_k);
          for (const auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
            const double nu = sol.energies_mhz[j] - sol.energies_mhz[i];
            if (nu < req.axis_min - 10.0 * lw || nu > req.axis_max + 10.0 * lw) {
              ++skipped[chunk];
              continue;
            }
            const double dip = mean_perp_dipole_sq(sol, i, j, b_dir);
            lines.push_back({i, j, nu, w0 * dip * (pops.p[i] - pops.p[j])});
          }
        }
        for (const auto& line : lines)
          deposit_line(local, spec.axis, line.position, line.weight, lw);
      }
    }
  });

  for (std::size_t c = 0; c < n_chunks; ++c) {
    spec.meta.skipped_transitions += skipped[c];
    if (partial[c].empty()) continue;
    for (int k = 0; k < req.n_points; ++k) spec.intensity[k] += partial[c][k];
  }
  return spec;
}

namespace {

// The two main powder transitions at a given orientation: of the three level
// pairs, keep the two with the strongest transition dipole (the third is the
// weak double-quantum-like line).
std::array<std::pair<int, int>, 2> main_transitions(const EigenSolution& sol,
                                                    const Eigen::Vector3d& b_dir) {
  const std::array<std::pair<int, int>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
  std::array<double, 3> dip{};
  for (int k = 0; k < 3; ++k)
    dip[k] = mean_perp_dipole_sq(sol, pairs[k].first, pairs[k].second, b_dir);
  int weakest = 0;
  for (int k = 1; k < 3; ++k)
    if (dip[k] < dip[weakest]) weakest = k;
  std::array<std::pair<int, int>, 2> kept{};
  int idx = 0;
  for (int k = 0; k < 3; ++k)
    if (k != weakest) kept[idx++] = pairs[k];
  return kept;
}

}  // namespace

Spectrum frequency_distribution(const NvSystem& sys, double b_mt, const BroadeningModel& br,
                                const FreqDistOptions& opts) {
  sys.validate();
  br.validate();
  if (b_mt < 0.0) throw std::invalid_argument("frequency_distribution: B must be nonnegative");

  const double lw = br.lorentz_lw_mt * sys.gamma_mhz_per_mt;

  double lo = opts.axis_min_mhz, hi = opts.axis_max_mhz;
  if (!(lo < hi)) {
    // pre-scan the kept transitions to bound the support
    double nu_lo = 1e30, nu_hi = -1e30;
    for (int t = 0; t <= 64; ++t) {
      const double theta = t * (0.5 * constants::pi) / 64;
      const auto sol = diagonalize(build_hamiltonian(sys, {b_mt, theta, 0.0}));
      for (const auto [i, j] : main_transitions(sol, field_direction(theta, 0.0))) {
        const double nu = sol.energies_mhz[j] - sol.energies_mhz[i];
        nu_lo = std::min(nu_lo, nu);
        nu_hi = std::max(nu_hi, nu);
      }
    }
    const double pad = 3.0 * lw + 0.02 * sys.d_mhz + 0.02 * (nu_hi - nu_lo);
    lo = std::max(0.0, nu_lo - pad);
    hi = nu_hi + pad;
  }

  SpectrumRequest req;
  req.mode = SweepMode::kFrequency;
  req.fixed_b_mt = b_mt;
  req.axis_min = lo;
  req.axis_max = hi;
  req.n_points = opts.n_points;
  req.n_theta = opts.n_theta;
  req.n_phi = opts.n_phi;
  req.n_strain = opts.n_strain;
  req.validate();

  Spectrum spec;
  spec.meta.request = req;
  spec.axis.resize(req.n_points);
  const double step = (hi - lo) / (req.n_points - 1);
  for (int k = 0; k < req.n_points; ++k) spec.axis[k] = lo + k * step;
  spec.intensity.assign(req.n_points, 0.0);

  const bool has_strain = br.ex_fwhm_mhz > 0.0 || sys.ex_mhz != 0.0;
  const auto grid = orientation_grid(opts.n_theta, has_strain ? opts.n_phi : 1);
  const auto strains = strain_nodes(opts.n_strain, sys.ex_mhz, br.ex_fwhm_mhz);

  const std::size_t n_chunks = chunk_count(grid.size());
  std::vector<std::vector<double>> partial(n_chunks);

  parallel_chunks(grid.size(), [&](std::size_t begin, std::size_t end, std::size_t chunk) {
    std::vector<double>& local = partial[chunk];
    local.assign(req.n_points, 0.0);
    for (std::size_t g = begin; g < end; ++g) {
      const Orientation& o = grid[g];
      const Eigen::Vector3d b_dir = field_direction(o.theta_rad, o.phi_rad);
      for (const StrainNode& s : strains) {
        NvSystem local_sys = sys;
        local_sys.ex_mhz = s.ex_mhz;
        local_sys.ey_mhz = 0.0;
        const auto sol =
            diagonalize(build_hamiltonian(local_sys, {b_mt, o.theta_rad, o.phi_rad}));
        const double w = o.weight * s.weight;
        // the two main lines, equal weights, dipole weighting off
        for (const auto [i, j] : main_transitions(sol, b_dir))
          deposit_line(local, spec.axis, sol.energies_mhz[j] - sol.energies_mhz[i], w, lw);
      }
    }
  });

  for (std::size_t c = 0; c < n_chunks; ++c) {
    if (partial[c].empty()) continue;
    for (int k = 0; k < req.n_points; ++k) spec.intensity[k] += partial[c][k];
  }
  return spec;
}

BandwidthFractions bandwidth_fraction(const NvSystem& sys, double carrier_mhz, double b_mt,
                                      double delta_pol_mhz, const BroadeningModel& br,
                                      const FractionOptions& opts) {
  sys.validate();
  br.validate();
  if (!(delta_pol_mhz > 0.0))
    throw std::invalid_argument("bandwidth_fraction: delta_pol must be positive");

  const bool has_strain = br.ex_fwhm_mhz > 0.0 || sys.ex_mhz != 0.0;
  const auto grid = orientation_grid(opts.n_theta, has_strain ? opts.n_phi : 1);
  const auto strains = strain_nodes(opts.n_strain, sys.ex_mhz, br.ex_fwhm_mhz);
  const double lw_mhz = br.lorentz_lw_mt * sys.gamma_mhz_per_mt;

  struct Item { double nu12, nu23, weight; };
  const std::size_t n_items = grid.size() * strains.size();
  std::vector<Item> items(n_items);

  parallel_chunks(grid.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t g = begin; g < end; ++g) {
      const Orientation& o = grid[g];
      for (std::size_t s = 0; s < strains.size(); ++s) {
        NvSystem local_sys = sys;
        local_sys.ex_mhz = strains[s].ex_mhz;
        local_sys.ey_mhz = 0.0;
        const auto sol =
            diagonalize(build_hamiltonian(local_sys, {b_mt, o.theta_rad, o.phi_rad}));
        items[g * strains.size() + s] = {sol.energies_mhz[1] - sol.energies_mhz[0],
                                         sol.energies_mhz[2] - sol.energies_mhz[1],
                                         o.weight * strains[s].weight};
      }
    }
  });

  auto coverage = [&](double carrier, bool second) {
    const double lo = carrier - 0.5 * delta_pol_mhz;
    const double hi = carrier + 0.5 * delta_pol_mhz;
    double f = 0.0;
    for (const Item& it : items)
      f += it.weight * lorentz_window_probability(second ? it.nu23 : it.nu12, lo, hi, lw_mhz);
    return f;
  };

  double carrier = carrier_mhz;
  if (!(carrier > 0.0)) {
    // the experiment offsets the carrier to maximize the addressed fraction
    const auto u = perp_energies_analytic(sys.d_mhz, b_mt, sys.gamma_mhz_per_mt);
    const double nu90 = u.u2 - u.u1;
    const double lo = nu90 - 1.5 * delta_pol_mhz;
    const double hi = nu90 + 0.75 * delta_pol_mhz;
    double best_f = -1.0;
    for (int k = 0; k < opts.carrier_scan_points; ++k) {
      const double c = lo + (hi - lo) * k / (opts.carrier_scan_points - 1);
      const double f = coverage(c, false);
      if (f > best_f) { best_f = f; carrier = c; }
    }
  }

  return {coverage(carrier, false), coverage(carrier, true), carrier};
}

HeatingResult heating_analysis(const std::vector<HeatingPoint>& points, double nu_mhz,
                               double gamma_mhz_per_mt) {
  if (points.size() < 2)
    throw std::invalid_argument("heating_analysis: need at least two points");

  // invert B12(nu, D) for D, map to a temperature offset through dD/dT
  const double dd_dt = constants::nv_dd_dt_mhz_per_k;
  std::vector<double> power, temp;
  for (const auto& pt : points) {
    const double gb = gamma_mhz_per_mt * pt.b_peak_mt;
    const double d = nu_mhz - gb * gb / nu_mhz;
    power.push_back(pt.laser_power_mw);
    temp.push_back(d / dd_dt);  // arbitrary origin; only the slope matters
  }

  const std::size_t n = power.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sx += power[k];
    sy += temp[k];
    sxx += power[k] * power[k];
    sxy += power[k] * temp[k];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-12 * std::max(1.0, sxx * n))
    throw std::invalid_argument("heating_analysis: laser powers are degenerate");
  return {(n * sxy - sx * sy) / det};
}

double heated_peak_position(double power_mw, double rate_k_per_mw, double d0_mhz,
                            double nu_mhz, double gamma_mhz_per_mt) {
  const double dd_dt = thermal_shift_rate(nu_mhz, d0_mhz, gamma_mhz_per_mt).dd_dt_mhz_per_k;
  const double d = d0_mhz + dd_dt * rate_k_per_mw * power_mw;
  return resonance_fields(nu_mhz, d, gamma_mhz_per_mt).b12_mt;
}

}  // namespace nvdnp
