#pragma once

// Closed-loop second-moment propagation (exact and Monte Carlo) and the
// log-energy slope fit used to read off the empirical decay rate.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "msrate/linalg.h"
#include "msrate/model.h"

namespace msrate {

/// Standard-normal stream for one trajectory.
///
/// Substream t of seed s is std::mt19937_64 seeded through std::seed_seq
/// with the four 32-bit words (s_lo, s_hi, t_lo, t_hi); both are fully
/// specified by the C++ standard. Uniforms are u = (x >> 11)·2⁻⁵³ ∈ [0, 1).
/// Normals use Box–Muller on a pair (u₁, u₂):
///   r = sqrt(−2 ln(1 − u₁)),  z₀ = r·cos(2πu₂),  z₁ = r·sin(2πu₂),
/// returning z₀ first and z₁ on the next call.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t substream);

  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SimConfig {
  std::vector<double> x0;
  Matrix K;  // m×n, u = −Kx
  int horizon = 60;
  int num_traj = 10000;
  std::uint64_t seed = 42;
  std::pair<int, int> fit_window{10, 60};

  /// Throws ConfigError / DimensionMismatch.
  void validate(const SystemSpec& spec) const;
};

enum class MomentKind { exact, monte_carlo };

struct MomentTrajectory {
  std::vector<double> energies;  // E[x_kᵀx_k], k = 0..horizon (shorter if diverged)
  MomentKind kind = MomentKind::exact;
  double slope = 0.0;
  double slope_stderr = 0.0;
  bool diverged = false;
};

/// Energies above this stop the propagation and set `diverged`.
inline constexpr double kEnergyOverflow = 1e300;

/// Σ_{k+1} = A_cl Σ_k A_clᵀ + σ² Ā_cl Σ_k Ā_clᵀ from Σ₀ = x₀x₀ᵀ.
MomentTrajectory propagate_exact(const SystemSpec& spec, const Matrix& K,
                                 const std::vector<double>& x0, int horizon);

/// Sample mean of ‖x_k‖² over cfg.num_traj trajectories. Trajectory t draws
/// from GaussianStream(cfg.seed, t); per-step sums are reduced in trajectory
/// order, so the result does not depend on `threads` (0 = run inline).
MomentTrajectory monte_carlo(const SystemSpec& spec, const SimConfig& cfg,
                             unsigned threads = 0);

struct SlopeFit {
  double slope = 0.0;   // per-step slope of log energy
  double standard_error = 0.0;
};

/// Ordinary least squares of log(energies[k]) on k for k in [start, end].
/// Throws NonPositiveEnergy or ConfigError.
SlopeFit fit_slope(const MomentTrajectory& traj, std::pair<int, int> window);

}  // namespace msrate
