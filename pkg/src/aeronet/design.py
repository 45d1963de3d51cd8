"""Optimal-density machinery: the epsilon integral, upper bounds on the
optimal transmitter density, bounded grid search, and two-layer split
sweeps with min-max normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelClass
from .errors import DegenerateGeometry, DomainError, PreconditionViolated
from .netconfig import AssociationRule, Orientation, ValidatedConfig, validate
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate_semi_infinite
from .performance import network_aggregate

__all__ = [
    "DensityBound",
    "SplitSweepResult",
    "epsilon",
    "density_upper_bound",
    "optimize_density",
    "two_layer_split",
    "OptimizeResult",
]

# Fallback search ceiling when the analytic bound is unavailable or infinite.
DEFAULT_DENSITY_CAP = 1e-3
DEFAULT_DENSITY_FLOOR = 1e-8
GRID_POINTS_PER_DECADE = 25


def epsilon(
    config: ValidatedConfig,
    i: int,
    j: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Geometry/target-SINR integral whose reciprocal over 2 pi bounds the
    optimal transmitter density for the (rx i, tx j) pair.

    Integrand over [h, inf):
    x (1 - rho_L(x)/(1 + beta h^aL x^-aL) - rho_N(x)/(1 + beta h^aL x^-aN));
    the LoS exponent scales the altitude term in both denominators.
    """
    config = validate(config)
    h = config.altitude_diff(i, j)
    if h == 0.0:
        raise DegenerateGeometry(
            "equal-altitude pair: the bound integrand vanishes at the lower limit"
        )
    beta = config.beta(i, j)
    a_los = config.alpha(ChannelClass.LOS)
    a_nlos = config.alpha(ChannelClass.NLOS)
    gain = beta * h**a_los

    def integrand(x):
        rho_l = config.class_prob(i, j, ChannelClass.LOS, x)
        return x * (
            1.0
            - rho_l / (1.0 + gain * x ** (-a_los))
            - (1.0 - rho_l) / (1.0 + gain * x ** (-a_nlos))
        )

    return integrate_semi_infinite(integrand, h, quad)


@dataclass(frozen=True)
class DensityBound:
    """Upper bound of the optimal tx density for one (rx, tx) pair."""

    rx_layer: int
    tx_layer: int
    objective: str
    bound: float  # nodes/m^2, may be 0 or inf
    epsilon: float  # m^2, nan when not applicable
    reason: str


def _reciprocal_bound(eps: float) -> float:
    return math.inf if eps == 0.0 else 1.0 / (2.0 * math.pi * eps)


def density_upper_bound(
    config: ValidatedConfig,
    rule: AssociationRule,
    k: int,
    j: int,
    objective: str,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> DensityBound:
    """Corollary-style bound on the optimal j-layer transmitter density for
    the layer-k objective.  Proved for Rayleigh fading only."""
    config = validate(config)
    if objective not in ("stp", "ase"):
        raise DomainError(f"unknown objective {objective!r}")
    if config.fading.m_los != 1:
        raise PreconditionViolated("density bound proved for m_los = 1 only")

    if rule.orientation is Orientation.TRANSMITTER:
        if objective == "stp":
            return DensityBound(k, j, objective, 0.0, math.nan, "monotone decreasing")
        if k != j:
            return DensityBound(
                k, j, objective, 0.0, math.nan, "cross-layer ASE monotone decreasing"
            )
        best = 0.0
        best_eps = math.nan
        reason = "max over receiver layers of 1/(2 pi epsilon)"
        for i in range(config.num_layers):
            if config.layers[i].density_rx <= 0:
                continue
            try:
                eps = epsilon(config, i, k, quad)
            except DegenerateGeometry:
                return DensityBound(
                    k, j, objective, math.inf, math.nan, "degenerate geometry: h = 0"
                )
            bound = _reciprocal_bound(eps)
            if bound > best:
                best, best_eps = bound, eps
        if best == 0.0:
            raise DomainError("no receiver layer available for the same-layer bound")
        if math.isinf(best):
            reason = "epsilon zero"
        return DensityBound(k, j, objective, best, best_eps, reason)

    try:
        eps = epsilon(config, k, j, quad)
    except DegenerateGeometry:
        return DensityBound(
            k, j, objective, math.inf, math.nan, "degenerate geometry: h = 0"
        )
    bound = _reciprocal_bound(eps)
    reason = "epsilon zero" if math.isinf(bound) else "1/(2 pi epsilon)"
    return DensityBound(k, j, objective, bound, eps, reason)


@dataclass(frozen=True)
class OptimizeResult:
    density: float
    value: float
    grid: np.ndarray
    values: np.ndarray
    search_ceiling: float


def default_density_grid(ceiling: float) -> np.ndarray:
    hi = min(ceiling, DEFAULT_DENSITY_CAP)
    lo = DEFAULT_DENSITY_FLOOR
    if hi <= lo:
        hi = lo * 10.0
    decades = math.log10(hi / lo)
    points = max(int(round(decades * GRID_POINTS_PER_DECADE)), 2)
    return np.logspace(math.log10(lo), math.log10(hi), points)


def optimize_density(
    config: ValidatedConfig,
    rule: AssociationRule,
    k: int,
    j: int,
    objective: str,
    grid=None,
    search_ceiling: float | None = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    objective_fn=None,
) -> OptimizeResult:
    """Exhaustive search for the j-layer tx density maximizing the layer-k
    objective; ties break toward the smaller (cheaper) density."""
    config = validate(config)
    if search_ceiling is None:
        bound = density_upper_bound(config, rule, k, j, objective, quad)
        search_ceiling = bound.bound if math.isfinite(bound.bound) else DEFAULT_DENSITY_CAP
        search_ceiling = max(search_ceiling, DEFAULT_DENSITY_FLOOR * 10.0)
    if grid is None:
        grid = default_density_grid(search_ceiling)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("density grid is empty")
    grid = grid[grid <= search_ceiling]
    if grid.size == 0:
        raise DomainError("density grid lies entirely above the search ceiling")

    if objective_fn is None:
        from .performance import layer_performance

        def objective_fn(cfg):
            stp, ase = layer_performance(cfg, rule, k, quad)
            return stp if objective == "stp" else ase

    values = np.empty_like(grid)
    for idx, density in enumerate(grid):
        values[idx] = objective_fn(config.with_layer_density_tx(j, float(density)))
    best = int(np.argmax(values))
    # np.argmax already returns the first (smallest-density) maximizer.
    return OptimizeResult(
        density=float(grid[best]),
        value=float(values[best]),
        grid=grid,
        values=values,
        search_ceiling=float(search_ceiling),
    )


@dataclass(frozen=True)
class SplitSweepResult:
    """Objective over the split of a fixed total tx density between two
    layers, with the min-max-normalized curve."""

    lambda_total: float
    splits: np.ndarray
    values: np.ndarray
    normalized: np.ndarray
    argmax_split: float
    argmax_value: float


def two_layer_split(
    config: ValidatedConfig,
    rule: AssociationRule,
    tx_layers,
    lambda_total: float,
    splits,
    objective: str = "ase",
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> SplitSweepResult:
    """Sweep the fraction of a fixed total tx density assigned to the first
    of two designated layers and evaluate the network objective."""
    config = validate(config)
    if lambda_total <= 0:
        raise DomainError("total density must be positive")
    if objective not in ("stp", "ase"):
        raise DomainError(f"unknown objective {objective!r}")
    j, k = tx_layers
    if j == k:
        raise DomainError("the two tx layers must be distinct")
    splits = np.asarray(splits, dtype=float)
    if np.any((splits < 0) | (splits > 1)):
        raise DomainError("splits must lie in [0, 1]")

    values = np.empty_like(splits)
    for idx, rho in enumerate(splits):
        cfg = config.with_layer_density_tx(j, float(rho * lambda_total))
        cfg = cfg.with_layer_density_tx(k, float((1.0 - rho) * lambda_total))
        report = network_aggregate(cfg, rule, quad)
        values[idx] = report.network_stp if objective == "stp" else report.network_ase
    lo, hi = float(values.min()), float(values.max())
    normalized = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    best = int(np.argmax(values))
    return SplitSweepResult(
        lambda_total=float(lambda_total),
        splits=splits,
        values=values,
        normalized=normalized,
        argmax_split=float(splits[best]),
        argmax_value=float(values[best]),
    )
