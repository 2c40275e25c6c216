#include "msrate/rnvi.h"

#include <cmath>
#include <sstream>

#include "msrate/errors.h"
#include "msrate/riccati.h"

namespace msrate {

void RnviConfig::validate(int n) const {
  if (tau_grid.empty()) throw ConfigError("tau grid is empty");
  for (std::size_t j = 0; j < tau_grid.size(); ++j) {
    const double t = tau_grid[j];
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("tau values must lie in (0, 1)");
    if (j > 0 && !(t < tau_grid[j - 1])) throw ConfigError("tau grid must be strictly decreasing");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (max_inner_iters < 1) throw ConfigError("max_inner_iters must be >= 1");
  if (P0) {
    if (P0->dim() != n) throw ConfigError("P0 has the wrong dimension");
    if (std::abs(P0->trace() - 1.0) > 1e-10) throw ConfigError("P0 must have unit trace");
    if (lambda_min(*P0) < -1e-12) throw ConfigError("P0 must be positive semidefinite");
  }
}

FixedPointRecord solve_at_tau(const SystemSpec& spec, double tau, const SymMatrix& P_init,
                              double epsilon, int max_iters, const StepObserver& observer) {
  if (!(epsilon > 0.0)) throw InvalidArgument("solve_at_tau: epsilon must be > 0");
  if (max_iters < 1) throw InvalidArgument("solve_at_tau: max_iters must be >= 1");

  FixedPointRecord rec;
  rec.tau = tau;
  SymMatrix P = P_init;
  for (int k = 1; k <= max_iters; ++k) {
    NormalizedStep step = hat_phi(spec, P, tau);
    const double diff = (step.P_next - P).frobenius_norm();
    if (observer) observer(k, diff);
    rec.inner_iters = k;
    rec.residual = diff;
    rec.gamma = step.trace_Y;
    if (diff <= epsilon) {
      rec.converged = true;
      break;
    }
    P = std::move(step.P_next);
  }
  if (!rec.converged) {
    // Report the newest iterate with its own residual and γ.
    const NormalizedStep last = hat_phi(spec, P, tau);
    rec.residual = (last.P_next - P).frobenius_norm();
    rec.gamma = last.trace_Y;
  }
  rec.P = std::move(P);
  rec.K = gain(spec, rec.P);
  return rec;
}

ContinuationResult run_continuation(const SystemSpec& spec, const RnviConfig& cfg) {
  cfg.validate(spec.n());
  if (!validate(spec).nondegenerate) {
    throw Degenerate("run_continuation: [B; sigma*B_bar] does not have full column rank");
  }

  ContinuationResult out;
  out.records.reserve(cfg.tau_grid.size());
  SymMatrix P = cfg.P0 ? *cfg.P0 : SymMatrix::identity(spec.n()) * (1.0 / spec.n());
  for (std::size_t j = 0; j < cfg.tau_grid.size(); ++j) {
    FixedPointRecord rec =
        solve_at_tau(spec, cfg.tau_grid[j], P, cfg.epsilon, cfg.max_inner_iters);
    P = rec.P;
    out.records.push_back(std::move(rec));
    out.warm_start_chain.push_back(j > 0);
  }
  return out;
}

std::vector<double> default_tau_grid(double tau_start, double tau_end, int count) {
  if (!(tau_end > 0.0 && tau_end < tau_start && tau_start < 1.0)) {
    throw ConfigError("tau grid requires 0 < tau_end < tau_start < 1");
  }
  if (count < 2) throw ConfigError("tau grid requires at least 2 points");
  const double log_start = std::log(tau_start);
  const double log_step = (std::log(tau_end) - log_start) / (count - 1);
  std::vector<double> grid(static_cast<std::size_t>(count));
  grid.front() = tau_start;
  for (int i = 1; i + 1 < count; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(log_start + i * log_step);
  }
  grid.back() = tau_end;
  return grid;
}

}  // namespace msrate
