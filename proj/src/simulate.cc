#include "msrate/simulate.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "msrate/certify.h"
#include "msrate/errors.h"

namespace msrate {

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  engine_.seed(seq);
}

double GaussianStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

void SimConfig::validate(const SystemSpec& spec) const {
  if (static_cast<int>(x0.size()) != spec.n()) throw DimensionMismatch("x0 must have length n");
  if (K.rows() != spec.m() || K.cols() != spec.n()) throw DimensionMismatch("K must be m x n");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (num_traj < 1) throw ConfigError("num_traj must be >= 1");
  if (!(0 <= fit_window.first && fit_window.first < fit_window.second &&
        fit_window.second <= horizon)) {
    throw ConfigError("fit window must satisfy 0 <= start < end <= horizon");
  }
}

namespace {

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Truncates at the first non-finite or overflowing energy.
void apply_overflow_guard(MomentTrajectory& traj) {
  for (std::size_t k = 0; k < traj.energies.size(); ++k) {
    const double e = traj.energies[k];
    if (!std::isfinite(e) || e > kEnergyOverflow) {
      traj.energies.resize(k);
      traj.diverged = true;
      return;
    }
  }
}

}  // namespace

MomentTrajectory propagate_exact(const SystemSpec& spec, const Matrix& K,
                                 const std::vector<double>& x0, int horizon) {
  if (static_cast<int>(x0.size()) != spec.n()) throw DimensionMismatch("x0 must have length n");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  const Matrix drift = closed_loop_drift(spec, K);
  const Matrix noise = closed_loop_noise(spec, K);
  const Matrix drift_t = drift.transpose();
  const Matrix noise_t = noise.transpose();
  const double s2 = spec.sigma() * spec.sigma();

  MomentTrajectory traj;
  traj.kind = MomentKind::exact;
  traj.energies.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.energies.push_back(squared_norm(x0));

  Matrix sigma = SymMatrix::outer(x0).matrix();
  for (int k = 0; k < horizon; ++k) {
    sigma = drift * sigma * drift_t + s2 * (noise * sigma * noise_t);
    const double e = SymMatrix::symmetric_part(sigma).trace();
    traj.energies.push_back(e);
    if (!std::isfinite(e) || e > kEnergyOverflow) break;
  }
  apply_overflow_guard(traj);
  return traj;
}

MomentTrajectory monte_carlo(const SystemSpec& spec, const SimConfig& cfg, unsigned threads) {
  cfg.validate(spec);
  const Matrix drift = closed_loop_drift(spec, cfg.K);
  const Matrix noise = closed_loop_noise(spec, cfg.K);
  const double sigma = spec.sigma();
  const std::size_t steps = static_cast<std::size_t>(cfg.horizon) + 1;
  const std::size_t count = static_cast<std::size_t>(cfg.num_traj);

  // energy[t * steps + k] = ‖x_k‖² of trajectory t.
  std::vector<double> energy(count * steps, 0.0);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      GaussianStream rng(cfg.seed, t);
      std::vector<double> x = cfg.x0;
      double* out = energy.data() + t * steps;
      out[0] = squared_norm(x);
      for (std::size_t k = 1; k < steps; ++k) {
        const double w = sigma * rng.normal();
        const std::vector<double> dx = drift * std::span<const double>(x);
        const std::vector<double> nx = noise * std::span<const double>(x);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = dx[i] + w * nx[i];
        out[k] = squared_norm(x);
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    run_range(0, count);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
  }

  MomentTrajectory traj;
  traj.kind = MomentKind::monte_carlo;
  traj.energies.assign(steps, 0.0);
  traj.energies[0] = squared_norm(cfg.x0);
  for (std::size_t k = 1; k < steps; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t < count; ++t) s += energy[t * steps + k];
    traj.energies[k] = s / static_cast<double>(count);
  }
  apply_overflow_guard(traj);
  return traj;
}

SlopeFit fit_slope(const MomentTrajectory& traj, std::pair<int, int> window) {
  const auto [start, end] = window;
  if (!(0 <= start && start < end && end < static_cast<int>(traj.energies.size()))) {
    throw ConfigError("fit_slope: window outside the trajectory");
  }
  const int count = end - start + 1;
  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(count));
  for (int k = start; k <= end; ++k) {
    const double e = traj.energies[static_cast<std::size_t>(k)];
    if (!(e > 0.0)) {
      throw NonPositiveEnergy("fit_slope: energy at step " + std::to_string(k) +
                              " is not positive");
    }
    y.push_back(std::log(e));
  }

  double kbar = 0.0;
  double ybar = 0.0;
  for (int i = 0; i < count; ++i) {
    kbar += start + i;
    ybar += y[static_cast<std::size_t>(i)];
  }
  kbar /= count;
  ybar /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (int i = 0; i < count; ++i) {
    const double dk = (start + i) - kbar;
    sxx += dk * dk;
    sxy += dk * (y[static_cast<std::size_t>(i)] - ybar);
  }

  SlopeFit fit;
  fit.slope = sxy / sxx;
  if (count > 2) {
    double ssr = 0.0;
    for (int i = 0; i < count; ++i) {
      const double r = y[static_cast<std::size_t>(i)] - ybar - fit.slope * ((start + i) - kbar);
      ssr += r * r;
    }
    fit.standard_error = std::sqrt(ssr / (count - 2) / sxx);
  }
  return fit;
}

}  // namespace msrate
