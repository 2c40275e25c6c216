#include "msrate/certify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "msrate/errors.h"
#include "msrate/riccati.h"

namespace msrate {

namespace {

void check_gain_shape(const SystemSpec& spec, const Matrix& K) {
  if (K.rows() != spec.m() || K.cols() != spec.n()) {
    std::ostringstream msg;
    msg << "gain must be " << spec.m() << "x" << spec.n() << ", got " << K.rows() << "x"
        << K.cols();
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

StageBounds bounds_at(const SystemSpec& spec, const FixedPointRecord& record) {
  if (!record.converged) throw InvalidArgument("bounds_at: record did not converge");
  const SymMatrix& P = record.P;
  if (!cholesky(P)) throw NotPositiveDefinite("bounds_at: P is not positive definite");

  const int n = spec.n();
  const double tau = record.tau;
  const SymMatrix P_isqrt = sym_sqrt_inv(P);
  const SymMatrix whitened = congruence(P_isqrt.matrix(), phi(spec, P));

  StageBounds b;
  b.L = lambda_min(whitened);
  b.U = record.gamma / (1.0 - tau);
  b.lambda_max_Pinv = 1.0 / lambda_min(P);
  b.Delta = tau / (n * (1.0 - tau)) * b.lambda_max_Pinv;
  b.J_up = std::log(b.U);
  if (b.L > 0.0) {
    b.J_low = std::log(b.L);
  } else {
    b.J_low = -std::numeric_limits<double>::infinity();
    b.nonpositive_L = true;
  }
  return b;
}

BoundsCertificate aggregate(const SystemSpec& spec, const ContinuationResult& result) {
  BoundsCertificate cert;
  cert.J_low_best = -std::numeric_limits<double>::infinity();
  cert.J_up_best = std::numeric_limits<double>::infinity();
  bool have_low = false;
  bool have_up = false;

  for (const FixedPointRecord& rec : result.records) {
    if (!rec.converged) continue;
    const StageBounds b = bounds_at(spec, rec);
    cert.per_tau.push_back({rec.tau, b.J_low, b.J_up, b.Delta, b.lambda_max_Pinv, rec.inner_iters});
    if (!have_low || b.J_low > cert.J_low_best) {
      cert.J_low_best = b.J_low;
      cert.tau_low = rec.tau;
      have_low = true;
    }
    if (!have_up || b.J_up < cert.J_up_best) {
      cert.J_up_best = b.J_up;
      cert.tau_up = rec.tau;
      cert.K_up = rec.K;
      have_up = true;
    }
  }
  if (cert.per_tau.empty()) throw NoConvergedStage("aggregate: no stage converged");

  cert.rho_low = std::exp(cert.J_low_best / 2.0);
  cert.rho_up = std::exp(cert.J_up_best / 2.0);
  return cert;
}

NormBounds norm_bounds(const SystemSpec& spec) {
  if (!validate(spec).nondegenerate) {
    throw Degenerate("norm_bounds: [B; sigma*B_bar] does not have full column rank");
  }
  const EigenDecomposition e = sym_eigen(phi(spec, SymMatrix::identity(spec.n())));
  NormBounds nb;
  nb.alpha = std::sqrt(std::max(0.0, e.values.front()));
  nb.beta = std::sqrt(std::max(0.0, e.values.back()));
  return nb;
}

Matrix closed_loop_drift(const SystemSpec& spec, const Matrix& K) {
  check_gain_shape(spec, K);
  return spec.A() - spec.B() * K;
}

Matrix closed_loop_noise(const SystemSpec& spec, const Matrix& K) {
  check_gain_shape(spec, K);
  return spec.A_bar() - spec.B_bar() * K;
}

double closed_loop_rate(const SystemSpec& spec, const Matrix& K) {
  const Matrix drift = closed_loop_drift(spec, K);
  const Matrix noise = closed_loop_noise(spec, K);
  const Matrix drift_t = drift.transpose();
  const Matrix noise_t = noise.transpose();
  const double s2 = spec.sigma() * spec.sigma();
  const int n = spec.n();

  Matrix sigma = Matrix::identity(n) * (1.0 / n);
  double ratio = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int k = 1; k <= kRateMaxIters; ++k) {
    Matrix next = drift * sigma * drift_t + s2 * (noise * sigma * noise_t);
    const double r = SymMatrix::symmetric_part(next).trace();
    if (!(r > 0.0)) return 0.0;  // nilpotent closed loop
    if (!std::isfinite(r)) throw OracleNonConvergence("closed_loop_rate: overflow");
    if (k > 1 && std::abs(r - ratio) <= kRateTolerance * r) return std::sqrt(r);
    if (k > kRateMaxIters - 100) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    ratio = r;
    sigma = next * (1.0 / r);
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "closed_loop_rate: trace ratio did not settle within " << kRateMaxIters
      << " iterations; last ratios in [" << lo << ", " << hi << "]";
  throw OracleNonConvergence(msg.str());
}

}  // namespace msrate
