#pragma once

// Certified two-sided bounds on the optimal mean-square stabilizing rate
// from RNVI fixed points, plus the cheap norm-based bracket and an exact
// closed-loop rate oracle for a fixed linear gain.

#include <vector>

#include "msrate/linalg.h"
#include "msrate/model.h"
#include "msrate/rnvi.h"

namespace msrate {

/// Bounds carried by one converged fixed point.
///   L = λ_min(P^{-1/2}Φ(P)P^{-1/2})          J_low = log L   (−∞ if L ≤ 0)
///   U = γ/(1−τ)                              J_up  = log U
///   Delta = τ/(n(1−τ))·λ_max(P⁻¹)            (equals U − L at a fixed point)
struct StageBounds {
  double L = 0;
  double U = 0;
  double J_low = 0;
  double J_up = 0;
  double Delta = 0;
  double lambda_max_Pinv = 0;
  bool nonpositive_L = false;
};

/// Throws InvalidArgument for a non-converged record and NotPositiveDefinite
/// if P fails Cholesky.
StageBounds bounds_at(const SystemSpec& spec, const FixedPointRecord& record);

struct PerTauDiagnostics {
  double tau = 0;
  double J_low = 0;
  double J_up = 0;
  double Delta = 0;
  double lambda_max_Pinv = 0;
  int inner_iters = 0;
};

struct BoundsCertificate {
  double J_low_best = 0;  // may be −∞
  double J_up_best = 0;
  double rho_low = 0;  // exp(J_low_best / 2)
  double rho_up = 0;   // exp(J_up_best / 2)
  double tau_low = 0;
  double tau_up = 0;
  Matrix K_up;  // gain of the stage attaining J_up_best
  std::vector<PerTauDiagnostics> per_tau;  // converged stages only, grid order
};

/// Best bounds over converged stages; strict improvement, first stage wins
/// ties. Throws NoConvergedStage.
BoundsCertificate aggregate(const SystemSpec& spec, const ContinuationResult& result);

struct NormBounds {
  double alpha = 0;  // sqrt(max(0, λ_min(Φ(I))))
  double beta = 0;   // sqrt(λ_max(Φ(I)))
};

/// Throws Degenerate when [B; σB̄] is rank deficient.
NormBounds norm_bounds(const SystemSpec& spec);

inline constexpr double kRateTolerance = 1e-12;
inline constexpr int kRateMaxIters = 100000;

/// Mean-square rate of u = −Kx: square root of the Perron eigenvalue of
/// Σ ↦ A_cl Σ A_clᵀ + σ² Ā_cl Σ Ā_clᵀ, by trace-normalized power iteration
/// from I/n. Throws OracleNonConvergence.
double closed_loop_rate(const SystemSpec& spec, const Matrix& K);

/// A − BK and Ā − B̄K.
Matrix closed_loop_drift(const SystemSpec& spec, const Matrix& K);
Matrix closed_loop_noise(const SystemSpec& spec, const Matrix& K);

}  // namespace msrate
