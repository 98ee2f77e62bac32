#include "nvdnp/pulse_opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nvdnp {

namespace {

constexpr double kBoxLo = 0.0;
constexpr double kBoxHi = 1.2;

// splitmix64: small, seedable, identical across platforms
struct SplitMix64 {
  unsigned long long state;
  explicit SplitMix64(unsigned long long seed) : state(seed) {}
  double uniform() {
    state += 0x9e3779b97f4a7c15ULL;
    unsigned long long z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return (z >> 11) * 0x1.0p-53;
  }
};

std::vector<double> clamp_box(std::vector<double> a) {
  for (double& v : a) v = std::clamp(v, kBoxLo, kBoxHi);
  return a;
}

// Objective with a deterministic tie-breaker: the bandwidth dominates, the
// worst in-band fidelity only orders candidates of equal bandwidth.
struct Score {
  double bandwidth = -1.0;
  double margin = 0.0;

  bool better_than(const Score& other) const {
    if (bandwidth != other.bandwidth) return bandwidth > other.bandwidth;
    return margin > other.margin;
  }
};

Score score_candidate(const std::vector<double>& a, double omega1, double threshold,
                      const std::vector<double>& grid) {
  Score s;
  s.bandwidth = objective(a, omega1, threshold, grid);
  const auto profile = inversion_profile(PulseShape::composite(a), omega1, grid);
  double worst = 1.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (std::abs(grid[k]) <= 0.5 * s.bandwidth + 1e-12)
      worst = std::min(worst, 0.5 * (1.0 - profile[k]));
  s.margin = worst;
  return s;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (n_sidebands < 0) throw std::invalid_argument("OptimizerConfig: n_sidebands < 0");
  if (!(fidelity_threshold > 0.0) || !(fidelity_threshold < 1.0))
    throw std::invalid_argument("OptimizerConfig: threshold must lie in (0, 1)");
  if (budget < 1) throw std::invalid_argument("OptimizerConfig: budget must be >= 1");
  if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts must be >= 1");
  if (!delta_grid_mhz.empty()) {
    for (std::size_t k = 0; k < delta_grid_mhz.size(); ++k) {
      const double mirror = delta_grid_mhz[delta_grid_mhz.size() - 1 - k];
      if (std::abs(delta_grid_mhz[k] + mirror) > 1e-9)
        throw std::invalid_argument("OptimizerConfig: delta grid must be symmetric about 0");
    }
  }
}

std::vector<double> default_delta_grid(double omega1_mhz, int points, double span_factor) {
  std::vector<double> grid(points);
  const double span = span_factor * omega1_mhz;
  for (int k = 0; k < points; ++k)
    grid[k] = -span + 2.0 * span * k / (points - 1);
  return grid;
}

double objective(const std::vector<double>& a_list, double omega1_mhz, double threshold,
                 const std::vector<double>& delta_grid_mhz) {
  if (delta_grid_mhz.empty()) throw std::invalid_argument("objective: empty detuning grid");
  const auto profile = inversion_profile(PulseShape::composite(a_list), omega1_mhz,
                                         delta_grid_mhz);

  // walk outward from zero detuning until the fidelity drops below threshold
  const std::size_t n = delta_grid_mhz.size();
  std::size_t center = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (std::abs(delta_grid_mhz[k]) < std::abs(delta_grid_mhz[center])) center = k;

  auto fidelity = [&](std::size_t k) { return 0.5 * (1.0 - profile[k]); };
  if (fidelity(center) < threshold) return 0.0;

  std::size_t lo = center, hi = center;
  while (lo > 0 && fidelity(lo - 1) >= threshold) --lo;
  while (hi + 1 < n && fidelity(hi + 1) >= threshold) ++hi;

  // symmetric contiguous interval around zero
  const double reach = std::min(std::abs(delta_grid_mhz[lo]), std::abs(delta_grid_mhz[hi]));
  return 2.0 * reach;
}

CandidatePulse optimize(const OptimizerConfig& config, double omega1_mhz) {
  config.validate();
  if (!(omega1_mhz > 0.0))
    throw std::invalid_argument("optimize: Rabi frequency must be positive");

  const std::vector<double> grid = config.delta_grid_mhz.empty()
                                       ? default_delta_grid(omega1_mhz)
                                       : config.delta_grid_mhz;
  const int dim = 2 * config.n_sidebands + 1;
  int evals_left = config.budget;

  auto eval = [&](const std::vector<double>& a) {
    --evals_left;
    return score_candidate(a, omega1_mhz, config.fidelity_threshold, grid);
  };

  std::vector<double> best_a(static_cast<std::size_t>(dim), 0.0);
  best_a.back() = 0.5;  // rectangular baseline
  Score best = eval(best_a);

  SplitMix64 rng(config.seed * 0x9e3779b97f4a7c15ULL + 0x12345);
  for (int restart = 0; restart < config.restarts && evals_left > 0; ++restart) {
    // deterministic seeded start: small alternating sidebands around a
    // near-rectangular center
    std::vector<double> start(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim - 1; ++k) start[static_cast<std::size_t>(k)] = 0.6 * rng.uniform();
    start.back() = 0.4 + 0.5 * rng.uniform();
    if (restart == 0) {
      for (double& v : start) v = 0.25;
      start.back() = 0.6;
    }

    // Nelder-Mead with box clamping
    const int n = dim;
    std::vector<std::vector<double>> simplex;
    std::vector<Score> scores;
    simplex.push_back(clamp_box(start));
    scores.push_back(eval(simplex[0]));
    for (int k = 0; k < n; ++k) {
      auto v = start;
      v[static_cast<std::size_t>(k)] += v[static_cast<std::size_t>(k)] > 0.6 ? -0.15 : 0.15;
      simplex.push_back(clamp_box(v));
      scores.push_back(eval(simplex.back()));
    }

    const int per_restart = std::max(50, config.budget / config.restarts);
    int local_evals = 0;
    while (evals_left > 0 && local_evals < per_restart) {
      // order: best first
      std::vector<std::size_t> idx(simplex.size());
      for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores[a].better_than(scores[b]);
      });
      std::vector<std::vector<double>> sx;
      std::vector<Score> sc;
      for (std::size_t k : idx) { sx.push_back(simplex[k]); sc.push_back(scores[k]); }
      simplex = sx;
      scores = sc;

      std::vector<double> centroid(static_cast<std::size_t>(n), 0.0);
      for (int k = 0; k < n; ++k)
        for (int d = 0; d < n; ++d)
          centroid[static_cast<std::size_t>(d)] +=
              simplex[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] / n;

      auto blend = [&](double factor) {
        std::vector<double> v(static_cast<std::size_t>(n));
        const auto& worst = simplex.back();
        for (int d = 0; d < n; ++d)
          v[static_cast<std::size_t>(d)] =
              centroid[static_cast<std::size_t>(d)] +
              factor * (centroid[static_cast<std::size_t>(d)] - worst[static_cast<std::size_t>(d)]);
        return clamp_box(v);
      };

      const auto reflected = blend(1.0);
      const Score r = eval(reflected); ++local_evals;
      if (r.better_than(scores.front())) {
        const auto expanded = blend(2.0);
        const Score e = eval(expanded); ++local_evals;
        simplex.back() = e.better_than(r) ? expanded : reflected;
        scores.back() = e.better_than(r) ? e : r;
      } else if (r.better_than(scores[scores.size() - 2])) {
        simplex.back() = reflected;
        scores.back() = r;
      } else {
        const auto contracted = blend(-0.5);
        const Score c = eval(contracted); ++local_evals;
        if (c.better_than(scores.back())) {
          simplex.back() = contracted;
          scores.back() = c;
        } else {
          for (std::size_t k = 1; k < simplex.size(); ++k) {
            for (int d = 0; d < n; ++d)
              simplex[k][static_cast<std::size_t>(d)] =
                  0.5 * (simplex[k][static_cast<std::size_t>(d)] +
                         simplex[0][static_cast<std::size_t>(d)]);
            scores[k] = eval(simplex[k]); ++local_evals;
          }
        }
      }
      if (evals_left <= 0) break;
    }

    for (std::size_t k = 0; k < simplex.size(); ++k) {
      if (scores[k].better_than(best) ||
          (!(best.better_than(scores[k])) && simplex[k] < best_a)) {
        best = scores[k];
        best_a = simplex[k];
      }
    }
  }

  CandidatePulse out;
  out.a_list = best_a;
  out.bandwidth_mhz = best.bandwidth;
  out.min_fidelity_in_band = best.margin;
  out.feasible = best.bandwidth > 0.0;
  if (!out.feasible) {
    out.a_list.assign(static_cast<std::size_t>(dim), 0.0);
    out.a_list.back() = 0.5;
  }
  return out;
}

PulseAccounting accounting(const std::vector<double>& a_list) {
  const PulseShape p = PulseShape::composite(a_list);
  return {p.duration_pi_units(), p.power_pi_units()};
}

}  // namespace nvdnp
