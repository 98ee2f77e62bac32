#include "nvdnp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace nvdnp {

namespace {

// Model interface for the damped least-squares fitter: value and analytic
// gradient with respect to the parameter vector.
struct Model {
  int n_params = 0;
  std::function<double(double, const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> gradient;
  std::function<void(Eigen::VectorXd&)> clamp;
};

// power term (x/T)^beta with guards for x = 0
double stretch_pow(double x, double t, double beta) {
  if (x <= 0.0) return 0.0;
  return std::pow(x / t, beta);
}

Model stretched_model(StretchedMode mode) {
  const double sign = mode == StretchedMode::kSaturation ? 1.0 : -1.0;
  Model m;
  m.n_params = 3;  // A, T, beta
  m.value = [sign](double x, const Eigen::VectorXd& p) {
    const double e = std::exp(-stretch_pow(x, p(1), p(2)));
    return sign > 0.0 ? p(0) * (1.0 - e) : p(0) * e;
  };
  m.gradient = [sign](double x, const Eigen::VectorXd& p) {
    Eigen::VectorXd g(3);
    const double u = stretch_pow(x, p(1), p(2));
    const double e = std::exp(-u);
    const double de_dt = e * u * p(2) / p(1);           // d e / d T
    const double de_db = x > 0.0 ? -e * u * std::log(x / p(1)) : 0.0;
    if (sign > 0.0) {
      g(0) = 1.0 - e;
      g(1) = -p(0) * de_dt;
      g(2) = -p(0) * de_db;
    } else {
      g(0) = e;
      g(1) = p(0) * de_dt;
      g(2) = p(0) * de_db;
    }
    return g;
  };
  m.clamp = [](Eigen::VectorXd& p) {
    p(1) = std::max(p(1), 1e-12);
    p(2) = std::clamp(p(2), 1e-3, 2.0);
  };
  return m;
}

Model rotation_model() {
  Model m;
  m.n_params = 4;  // s0, a, w0, beta
  m.value = [](double x, const Eigen::VectorXd& p) {
    const double e = std::exp(-stretch_pow(x, p(2), p(3)));
    return p(0) + p(1) * (1.0 - e);
  };
  m.gradient = [](double x, const Eigen::VectorXd& p) {
    Eigen::VectorXd g(4);
    const double u = stretch_pow(x, p(2), p(3));
    const double e = std::exp(-u);
    g(0) = 1.0;
    g(1) = 1.0 - e;
    g(2) = -p(1) * e * u * p(3) / p(2);
    g(3) = x > 0.0 ? p(1) * e * u * std::log(x / p(2)) : 0.0;
    return g;
  };
  m.clamp = [](Eigen::VectorXd& p) {
    p(2) = std::max(p(2), 1e-12);
    p(3) = std::clamp(p(3), 1e-3, 2.0);
  };
  return m;
}

struct LmOutcome {
  Eigen::VectorXd params;
  Eigen::VectorXd errors;
  double cost = 0.0;
  bool converged = false;
  bool identifiable = true;
};

LmOutcome levenberg_marquardt(const Model& model, const TimeSeries& series,
                              Eigen::VectorXd p) {
  const std::size_t n = series.t.size();
  const int np = model.n_params;
  std::vector<double> w(n, 1.0);
  if (!series.sigma.empty())
    for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / (series.sigma[k] * series.sigma[k]);

  auto cost_of = [&](const Eigen::VectorXd& q) {
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = series.y[k] - model.value(series.t[k], q);
      c += w[k] * r * r;
    }
    return c;
  };

  model.clamp(p);
  double cost = cost_of(p);
  double lambda = 1e-3;
  bool converged = false;

  Eigen::MatrixXd jtj(np, np);
  Eigen::VectorXd jtr(np);
  for (int iter = 0; iter < 300; ++iter) {
    jtj.setZero();
    jtr.setZero();
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::VectorXd g = model.gradient(series.t[k], p);
      const double r = series.y[k] - model.value(series.t[k], p);
      jtj += w[k] * g * g.transpose();
      jtr += w[k] * r * g;
    }
    Eigen::MatrixXd damped = jtj;
    for (int d = 0; d < np; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
    const Eigen::VectorXd step = damped.ldlt().solve(jtr);
    Eigen::VectorXd trial = p + step;
    model.clamp(trial);
    const double trial_cost = cost_of(trial);
    if (trial_cost < cost) {
      const double rel = std::abs(cost - trial_cost) / std::max(cost, 1e-300);
      p = trial;
      cost = trial_cost;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (rel < 1e-12 || step.norm() < 1e-12 * (1.0 + p.norm())) { converged = true; break; }
    } else {
      lambda *= 3.0;
      if (lambda > 1e10) { converged = cost_of(p) < 1e-20 ? true : false; break; }
    }
  }

  LmOutcome out;
  out.params = p;
  out.cost = cost;
  out.converged = converged;

  // covariance-derived errors; a singular normal matrix marks the fit as
  // unidentifiable (flat directions such as w0 when a = 0)
  jtj.setZero();
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::VectorXd g = model.gradient(series.t[k], p);
    jtj += w[k] * g * g.transpose();
  }
  const double dof = std::max(1.0, static_cast<double>(n) - np);
  const double s2 = series.sigma.empty() ? cost / dof : 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  out.errors = Eigen::VectorXd::Constant(np, std::numeric_limits<double>::infinity());
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse() * s2;
    for (int d = 0; d < np; ++d)
      out.errors(d) = cov(d, d) > 0.0 ? std::sqrt(cov(d, d)) : 0.0;
    const double cond = jtj.norm() * lu.inverse().norm();
    out.identifiable = cond < 1e12;
  } else {
    out.identifiable = false;
  }
  return out;
}

FitResult pack_result(const LmOutcome& out, const std::vector<std::string>& names) {
  FitResult fr;
  for (std::size_t k = 0; k < names.size(); ++k) {
    fr.params[names[k]] = out.params(static_cast<int>(k));
    fr.std_errors[names[k]] = out.errors(static_cast<int>(k));
  }
  fr.residual_norm = std::sqrt(out.cost);
  fr.converged = out.converged && out.identifiable;
  return fr;
}

}  // namespace

void TimeSeries::validate(std::size_t min_points) const {
  if (t.size() != y.size() || (!sigma.empty() && sigma.size() != t.size()))
    throw std::invalid_argument("TimeSeries: array lengths differ");
  if (t.size() < min_points)
    throw std::invalid_argument("TimeSeries: too few points");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (!(t[k] > t[k - 1]))
      throw std::invalid_argument("TimeSeries: abscissa must be strictly increasing");
}

FitResult fit_stretched_exp(const TimeSeries& series, StretchedMode mode) {
  series.validate(4);
  const Model model = stretched_model(mode);

  const double ymax = *std::max_element(series.y.begin(), series.y.end());
  const double span = series.t.back() - series.t.front();
  const double a0 = mode == StretchedMode::kSaturation
                        ? ymax
                        : std::max(std::abs(series.y.front()), 1e-12);

  // crude scale guess: the abscissa where the curve covers ~63% of its range
  double t0 = std::max(0.3 * span, series.t[1]);
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    const double frac = mode == StretchedMode::kSaturation
                            ? series.y[k] / std::max(a0, 1e-300)
                            : 1.0 - series.y[k] / std::max(a0, 1e-300);
    if (frac >= 0.632) { t0 = std::max(series.t[k], series.t[1]); break; }
  }

  LmOutcome best;
  best.cost = std::numeric_limits<double>::infinity();
  for (double beta0 : {0.5, 0.7, 1.0}) {
    Eigen::VectorXd p(3);
    p << a0, t0, beta0;
    const LmOutcome out = levenberg_marquardt(model, series, p);
    if (out.cost < best.cost) best = out;
  }
  return pack_result(best, {"A", "T", "beta"});
}

FitResult fit_rotation_response(const TimeSeries& series) {
  series.validate(5);
  if (std::abs(series.t.front()) > 1e-12)
    throw std::invalid_argument("fit_rotation_response: series must include w_r = 0");
  const Model model = rotation_model();

  const double s0 = series.y.front();
  const double ymax = *std::max_element(series.y.begin(), series.y.end());
  const double a0 = std::max(ymax - s0, 1e-12);
  const double span = series.t.back();

  LmOutcome best;
  best.cost = std::numeric_limits<double>::infinity();
  for (double beta0 : {0.5, 0.7, 1.0}) {
    for (double w0 : {0.15 * span, 0.4 * span}) {
      Eigen::VectorXd p(4);
      p << s0, a0, w0, beta0;
      const LmOutcome out = levenberg_marquardt(model, series, p);
      if (out.cost < best.cost) best = out;
    }
  }
  return pack_result(best, {"s0", "a", "w0", "beta"});
}

void SampleSpec::validate() const {
  if (!(mass_mg > 0.0) || !(isotope_abundance > 0.0) || !(molar_mass_g_per_mol > 0.0) ||
      !(gamma_mhz_per_t > 0.0) || atoms_per_molecule < 1)
    throw std::invalid_argument("SampleSpec: all properties must be positive");
}

double SampleSpec::nuclei_count() const {
  validate();
  return atoms_per_molecule * (mass_mg * 1e-3) * constants::avogadro_na *
         isotope_abundance / molar_mass_g_per_mol;
}

void ProtocolTiming::validate() const {
  if (t_laser_us < 0.0 || !(tau_srt_us > 0.0) || repetitions < 1)
    throw std::invalid_argument("ProtocolTiming: invalid timing");
  if (t_laser_us > tau_srt_us)
    throw std::invalid_argument("ProtocolTiming: laser pulse exceeds the repetition period");
}

double gamma_ref(const SampleSpec& diamond, const SampleSpec& reference) {
  return (diamond.gamma_mhz_per_t * diamond.nuclei_count()) /
         (reference.gamma_mhz_per_t * reference.nuclei_count());
}

double thermal_polarization(double b_t, double temperature_k, double gamma_mhz_per_t) {
  if (b_t < 0.0 || !(temperature_k > 0.0) || !(gamma_mhz_per_t > 0.0))
    throw std::invalid_argument("thermal_polarization: invalid inputs");
  return constants::mhz_to_kelvin * gamma_mhz_per_t * b_t / (2.0 * temperature_k);
}

double absolute_polarization(double s_hp_uv, double s_ref_uv, double gamma_ref_value,
                             double p_thermal_detection) {
  if (!(s_ref_uv > 0.0))
    throw std::invalid_argument("absolute_polarization: reference signal must be positive");
  return p_thermal_detection * s_hp_uv / (gamma_ref_value * s_ref_uv);
}

double enhancement(double p_abs, double p_thermal_pol_field) {
  if (!(p_thermal_pol_field > 0.0))
    throw std::invalid_argument("enhancement: thermal polarization must be positive");
  return p_abs / p_thermal_pol_field;
}

double enhancement_ratio_model(double drho1, double conc1_ppm, double drho2,
                               double conc2_ppm) {
  if (!(drho2 > 0.0) || !(conc2_ppm > 0.0))
    throw std::invalid_argument("enhancement_ratio_model: denominator must be positive");
  return (drho1 * conc1_ppm) / (drho2 * conc2_ppm);
}

double diffusion_length_nm(double d_spin_cm2_per_s, double t_s) {
  if (d_spin_cm2_per_s < 0.0 || t_s < 0.0)
    throw std::invalid_argument("diffusion_length: inputs must be nonnegative");
  return std::sqrt(d_spin_cm2_per_s * t_s) * 1e7;  // cm -> nm
}

double nn_distance_nm(double conc_ppm, double lattice_density_cm3) {
  if (!(conc_ppm > 0.0) || !(lattice_density_cm3 > 0.0))
    throw std::invalid_argument("nn_distance: inputs must be positive");
  const double n = conc_ppm * 1e-6 * lattice_density_cm3;  // cm^-3
  return 0.55 * std::pow(n, -1.0 / 3.0) * 1e7;
}

TumblingResult tumbling(double radius_nm, double eta_pa_s, double temperature_k,
                        double angle_window_rad, double cycle_time_ms) {
  if (!(radius_nm > 0.0) || !(eta_pa_s > 0.0) || !(temperature_k > 0.0) ||
      !(angle_window_rad > 0.0) || !(cycle_time_ms > 0.0))
    throw std::invalid_argument("tumbling: inputs must be positive");
  const double r = radius_nm * 1e-9;
  const double d_r = constants::boltzmann_kb * temperature_k /
                     (8.0 * constants::pi * eta_pa_s * r * r * r);
  const double residence_s = angle_window_rad * angle_window_rad / (2.0 * d_r);
  const double residence_ms = residence_s * 1e3;
  return {d_r, residence_ms, static_cast<long>(std::floor(residence_ms / cycle_time_ms))};
}

double protocol_power_mw(const ProtocolTiming& timing, double peak_power_mw) {
  timing.validate();
  if (peak_power_mw < 0.0)
    throw std::invalid_argument("protocol_power: peak power must be nonnegative");
  return peak_power_mw * timing.t_laser_us / timing.tau_srt_us;
}

}  // namespace nvdnp
