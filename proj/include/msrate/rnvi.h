#pragma once

// Regularized normalized value iteration: fixed-point iteration of Φ̂_τ at a
// single τ, and continuation over a decreasing τ schedule in which every
// stage is warm-started from the previous stage's fixed point.

#include <functional>
#include <optional>
#include <vector>

#include "msrate/linalg.h"
#include "msrate/model.h"

namespace msrate {

inline constexpr double kDefaultTauStart = 0.5;
inline constexpr double kDefaultTauEnd = 1e-5;
inline constexpr int kDefaultTauCount = 40;
inline constexpr double kDefaultEpsilon = 1e-12;
inline constexpr int kDefaultMaxInnerIters = 10000;

struct RnviConfig {
  std::vector<double> tau_grid;  // strictly decreasing, each in (0, 1)
  double epsilon = kDefaultEpsilon;
  int max_inner_iters = kDefaultMaxInnerIters;
  std::optional<SymMatrix> P0;  // trace 1, PSD; defaults to I/n

  /// Throws ConfigError.
  void validate(int n) const;
};

struct FixedPointRecord {
  double tau = 0;
  SymMatrix P;       // trace 1
  double gamma = 0;  // trace((1−τ)Φ(P) + (τ/n)I)
  Matrix K;          // K(P), m×n
  int inner_iters = 0;
  double residual = 0;  // ‖Φ̂_τ(P) − P‖_F
  bool converged = false;
};

struct ContinuationResult {
  std::vector<FixedPointRecord> records;  // same order as the τ grid
  std::vector<bool> warm_start_chain;     // stage j started from stage j−1
};

/// Called once per Φ̂_τ application with the 1-based step count and the
/// Frobenius step ‖Φ̂_τ(P_k) − P_k‖.
using StepObserver = std::function<void(int step, double step_norm)>;

/// Iterates P ← Φ̂_τ(P) from P_init until ‖Φ̂_τ(P) − P‖_F ≤ epsilon or
/// max_iters applications. The returned P is the last iterate whose residual
/// was measured, so residual, gamma and K all refer to the same matrix.
/// Exhausting max_iters yields converged = false, not an exception.
FixedPointRecord solve_at_tau(const SystemSpec& spec, double tau, const SymMatrix& P_init,
                              double epsilon = kDefaultEpsilon,
                              int max_iters = kDefaultMaxInnerIters,
                              const StepObserver& observer = {});

/// Runs every stage of cfg.tau_grid. Non-converged stages are recorded
/// (converged = false) and their last iterate still seeds the next stage.
ContinuationResult run_continuation(const SystemSpec& spec, const RnviConfig& cfg);

/// `count` geometrically spaced values from tau_start down to tau_end,
/// both endpoints included exactly. Throws ConfigError.
std::vector<double> default_tau_grid(double tau_start = kDefaultTauStart,
                                     double tau_end = kDefaultTauEnd,
                                     int count = kDefaultTauCount);

}  // namespace msrate
