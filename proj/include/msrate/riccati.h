#pragma once

// One-step optimal value operator of the multiplicative-noise system and its
// trace-normalized, regularized variant. The expectation over ω is taken in
// closed form (E[ω] = 0, E[ω²] = σ²).

#include "msrate/linalg.h"
#include "msrate/model.h"

namespace msrate {

struct RiccatiBlocks {
  SymMatrix R;    // BᵀPB + σ²B̄ᵀPB̄            (m×m)
  Matrix S;       // AᵀPB + σ²ĀᵀPB̄            (n×m)
  SymMatrix Phi;  // AᵀPA + σ²ĀᵀPĀ − S·R⁻¹·Sᵀ  (n×n)
  bool used_pinv = false;  // R was singular; R⁻¹ replaced by R⁺
};

/// Tolerance for the P ⪰ 0 precondition, relative to max(1, ‖P‖_F).
inline constexpr double kPsdTolerance = 1e-10;

/// Throws NotPsd when λ_min(P) < −tolerance.
RiccatiBlocks blocks(const SystemSpec& spec, const SymMatrix& P);

/// Φ(P).
SymMatrix phi(const SystemSpec& spec, const SymMatrix& P);

/// K(P) = R(P)⁻¹S(P)ᵀ (m×n); the minimizing control is u = −K(P)x.
/// Throws NotPositiveDefinite when R(P) is singular.
Matrix gain(const SystemSpec& spec, const SymMatrix& P);

struct NormalizedStep {
  SymMatrix P_next;    // Y / trace(Y)
  double trace_Y = 0;  // trace(Y), Y = (1−τ)Φ(P) + (τ/n)I
};

/// Φ̂_τ(P). P must have unit trace (to 1e-10) and τ ∈ (0, 1). The returned
/// matrix has trace exactly 1.
NormalizedStep hat_phi(const SystemSpec& spec, const SymMatrix& P, double tau);

/// δ_τ = (τ/n) / ((1−τ)C_A + τ): lower eigenvalue bound for the image of Φ̂_τ.
double delta_tau(int n, double C_A, double tau);

struct LipschitzConstants {
  double alpha_A = 0;  // ‖A‖² + σ²‖Ā‖²
  double alpha_S = 0;  // ‖A‖‖B‖ + σ²‖Ā‖‖B̄‖
  double alpha_R = 0;  // ‖B‖² + σ²‖B̄‖²
  double a = 0;        // slice parameter actually used
  double c_R = 0;      // 1 / (a·λ_min(R₀))
  double L_Phi = 0;    // α_A + 2α_S²c_R + α_S²α_R c_R²
  double C_Phi = 0;    // α_A + α_S²c_R
  double Lambda_tau = 0;
  double delta_tau = 0;
};

/// Closed-form Lipschitz data on the slice {P ⪰ aI, trace P = 1}. Passing
/// a ≤ 0 selects a = δ_τ. Λ(τ) is always evaluated with the selected a.
/// Throws Degenerate when λ_min(R₀) ≤ 0.
LipschitzConstants constants(const SystemSpec& spec, double a, double tau);

}  // namespace msrate
