#include "msrate/riccati.h"

#include <cmath>
#include <sstream>

#include "msrate/errors.h"

namespace msrate {

RiccatiBlocks blocks(const SystemSpec& spec, const SymMatrix& P) {
  if (P.dim() != spec.n()) throw DimensionMismatch("blocks: P has the wrong dimension");
  const double tol = kPsdTolerance * std::max(1.0, P.frobenius_norm());
  const double pmin = lambda_min(P);
  if (pmin < -tol) {
    std::ostringstream msg;
    msg << "blocks: P is not positive semidefinite (lambda_min = " << pmin << ")";
    throw NotPsd(msg.str());
  }

  const double s2 = spec.sigma() * spec.sigma();
  RiccatiBlocks out;
  out.R = congruence(spec.B(), P) + s2 * congruence(spec.B_bar(), P);
  out.S = bilinear(spec.A(), P, spec.B()) + s2 * bilinear(spec.A_bar(), P, spec.B_bar());
  const SymMatrix drift = congruence(spec.A(), P) + s2 * congruence(spec.A_bar(), P);

  // R⁻¹Sᵀ, or R⁺Sᵀ on the PSD boundary.
  Matrix RinvSt;
  if (cholesky(out.R)) {
    RinvSt = solve_spd(out.R, out.S.transpose());
  } else {
    RinvSt = pinv_psd(out.R).matrix() * out.S.transpose();
    out.used_pinv = true;
  }
  out.Phi = drift - SymMatrix::symmetric_part(out.S * RinvSt);
  return out;
}

SymMatrix phi(const SystemSpec& spec, const SymMatrix& P) { return blocks(spec, P).Phi; }

Matrix gain(const SystemSpec& spec, const SymMatrix& P) {
  const RiccatiBlocks b = blocks(spec, P);
  if (b.used_pinv) throw NotPositiveDefinite("gain: R(P) is not positive definite");
  return solve_spd(b.R, b.S.transpose());
}

NormalizedStep hat_phi(const SystemSpec& spec, const SymMatrix& P, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("hat_phi: tau must lie in (0, 1)");
  if (std::abs(P.trace() - 1.0) > 1e-10) throw InvalidArgument("hat_phi: trace(P) must be 1");
  const int n = spec.n();

  SymMatrix Y = (1.0 - tau) * phi(spec, P);
  for (int i = 0; i < n; ++i) Y.set(i, i, Y(i, i) + tau / n);
  const double trace_Y = Y.trace();
  if (!(trace_Y > 0.0) || !std::isfinite(trace_Y)) {
    throw DegenerateTrace("hat_phi: trace of the regularized image is not positive");
  }

  NormalizedStep out{Y * (1.0 / trace_Y), trace_Y};
  // Pin the last diagonal entry so the (sequential) trace is exactly 1.
  double head = 0.0;
  for (int i = 0; i + 1 < n; ++i) head += out.P_next(i, i);
  out.P_next.set(n - 1, n - 1, 1.0 - head);
  return out;
}

double delta_tau(int n, double C_A, double tau) {
  return (tau / n) / ((1.0 - tau) * C_A + tau);
}

LipschitzConstants constants(const SystemSpec& spec, double a, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("constants: tau must lie in (0, 1)");
  const double r0_min = lambda_min(input_gram(spec));
  if (!(r0_min > 0.0)) throw Degenerate("constants: lambda_min(R0) <= 0");

  const double s2 = spec.sigma() * spec.sigma();
  const double nA = spectral_norm(spec.A());
  const double nAb = spectral_norm(spec.A_bar());
  const double nB = spectral_norm(spec.B());
  const double nBb = spectral_norm(spec.B_bar());
  const int n = spec.n();

  LipschitzConstants c;
  c.alpha_A = nA * nA + s2 * nAb * nAb;
  c.alpha_S = nA * nB + s2 * nAb * nBb;
  c.alpha_R = nB * nB + s2 * nBb * nBb;
  c.delta_tau = delta_tau(n, std::max(drift_constant(spec), 0.0), tau);
  c.a = a > 0.0 ? a : c.delta_tau;
  c.c_R = 1.0 / (c.a * r0_min);

  const double aS2 = c.alpha_S * c.alpha_S;
  c.L_Phi = c.alpha_A + 2.0 * aS2 * c.c_R + aS2 * c.alpha_R * c.c_R * c.c_R;
  c.C_Phi = c.alpha_A + aS2 * c.c_R;
  const double one_m = 1.0 - tau;
  c.Lambda_tau = one_m * c.L_Phi / tau +
                 one_m * (one_m * c.C_Phi + tau / n) * n * c.L_Phi / (tau * tau);
  return c;
}

}  // namespace msrate
