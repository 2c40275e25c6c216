"""Certified bounds on the optimal mean-square stabilizing rate."""

from ._msrate import (
    ConfigError,
    Error,
    SystemSpec,
    certify,
    closed_loop_rate,
    default_tau_grid,
    load_spec,
    monte_carlo,
    norm_bounds,
    parse_spec,
    propagate_exact,
    validate,
)

__all__ = [
    "ConfigError",
    "Error",
    "SystemSpec",
    "certify",
    "closed_loop_rate",
    "default_tau_grid",
    "load_spec",
    "monte_carlo",
    "norm_bounds",
    "parse_spec",
    "propagate_exact",
    "validate",
]
