"""Distance laws and association analysis.

The nearest node of a class-thinned layer process has CCDF
exp(-int_h^v 2 pi lambda x rho(x) dx).  When the thinned intensity decays
fast enough (LoS air-to-air links) the total measure is finite and the
nearest node may not exist: that defect mass is tracked explicitly so the
association probabilities over all candidate processes still sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .channel import ChannelClass
from .errors import DomainError
from .netconfig import AssociationRule, Criterion, ValidatedConfig, orientation_set, validate
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate_semi_infinite

__all__ = [
    "NearestDistanceLaw",
    "candidate_radius",
    "AssociationReport",
    "AssociationAnalysis",
    "nearest_distance_law",
    "association_probabilities",
    "main_link_pdf",
]

# Stop accumulating the nearest-node measure once the CCDF is below e^-40,
# or once two consecutive doubling segments add less than this much measure
# (the finite-measure / defect case).
_MEASURE_CAP = 40.0
_MEASURE_STALL = 1e-13
_MAX_SEGMENTS = 48
_SEGMENT_POINTS = 801


class NearestDistanceLaw:
    """Distribution of the distance to the nearest node of one thinned
    layer process, seen from a node at altitude offset h.

    pdf(v) = 2 pi lambda v rho(v) ccdf(v) on [h, inf); ccdf(v) = 1 below h.
    ``defect_mass`` is the probability that no such node exists at all.
    """

    def __init__(self, density, h, rho):
        if density < 0:
            raise DomainError("density must be >= 0")
        self.density = float(density)
        self.h = float(h)
        self.rho = rho
        self._build()

    def _build(self):
        if self.density == 0.0:
            self.v_max = self.h
            self.total_measure = 0.0
            self.defect_mass = 1.0
            self._spline = None
            return
        coef = 2.0 * math.pi * self.density
        scale = 1.0 / math.sqrt(math.pi * self.density)
        span = max(min(scale * 0.25, 1000.0), 1.0)
        grids, lams = [np.array([self.h])], [np.array([0.0])]
        lam_end, lo = 0.0, self.h
        stalled = 0
        for _ in range(_MAX_SEGMENTS):
            hi = lo + span
            v = np.linspace(lo, hi, _SEGMENT_POINTS)
            intensity = coef * v * np.asarray(self.rho(v), dtype=float)
            lam_seg = cumulative_simpson(intensity, x=v, initial=0.0)
            grids.append(v[1:])
            lams.append(lam_end + lam_seg[1:])
            increment = float(lam_seg[-1])
            lam_end += increment
            lo = hi
            span *= 2.0
            if lam_end > _MEASURE_CAP:
                stalled = 0
                break
            stalled = stalled + 1 if increment < _MEASURE_STALL else 0
            if stalled >= 2:
                break
        self._grid = np.concatenate(grids)
        self._lam = np.concatenate(lams)
        self.v_max = float(self._grid[-1])
        self.total_measure = lam_end
        self.defect_mass = math.exp(-lam_end)
        if len(self._grid) > 3:
            self._spline = CubicSpline(self._grid, self._lam)
        else:
            self._spline = None

    def cumulative_measure(self, v):
        v = np.asarray(v, dtype=float)
        out = np.empty_like(v)
        below = v <= self.h
        above = v >= self.v_max
        mid = ~(below | above)
        out[below] = 0.0
        out[above] = self.total_measure
        if np.any(mid):
            out[mid] = self._spline(v[mid]) if self._spline is not None else 0.0
        return out

    def ccdf(self, v):
        scalar = np.ndim(v) == 0
        if np.any(np.asarray(v) < 0):
            raise DomainError("distance must be >= 0")
        out = np.exp(-self.cumulative_measure(np.atleast_1d(np.asarray(v, dtype=float))))
        return float(out[0]) if scalar else out

    def pdf(self, v):
        scalar = np.ndim(v) == 0
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any(v < 0):
            raise DomainError("distance must be >= 0")
        out = np.zeros_like(v)
        live = (v > self.h) & (v <= self.v_max) & (self.density > 0)
        if np.any(live):
            out[live] = (
                2.0 * math.pi * self.density * v[live] * np.asarray(self.rho(v[live]))
            ) * np.exp(-self.cumulative_measure(v[live]))
        return float(out[0]) if scalar else out

    def quantile(self, p):
        """Smallest v with CDF >= p; inf if p exceeds the existing mass."""
        if not 0.0 <= p < 1.0:
            raise DomainError("quantile level must be in [0, 1)")
        target = -math.log1p(-p)
        if target >= self.total_measure:
            return math.inf
        return float(np.interp(target, self._lam, self._grid))


def candidate_radius(criterion: Criterion, alpha_main, alpha_other, y, bias_main, bias_other):
    """Distance at which a competing process ties the candidate at y.

    Nearest rule: y * B_other / B_main.  Strongest rule:
    (y^alpha_main * B_other / B_main)^(1/alpha_other).
    """
    ratio = bias_other / bias_main
    if criterion is Criterion.NEAREST:
        return y * ratio
    return (np.asarray(y, dtype=float) ** alpha_main * ratio) ** (1.0 / alpha_other)


@dataclass(frozen=True)
class AssociationReport:
    """Association probabilities per (tx-layer, channel class) for one
    typical node orientation and rule."""

    rx_layer: int
    rule_tag: str
    probabilities: dict  # (layer, ChannelClass) -> probability

    def total(self) -> float:
        return float(sum(self.probabilities.values()))


class AssociationAnalysis:
    """Precomputed distance laws and association integrals for a typical
    node in one layer under one association rule.

    ``i`` is the layer of the typical node (the receiver for
    receiver-oriented rules, the transmitter otherwise); candidates are the
    orientation processes of every layer.
    """

    def __init__(
        self,
        config: ValidatedConfig,
        rule: AssociationRule,
        i: int,
        quad: QuadratureSpec = DEFAULT_QUADRATURE,
    ):
        self.config = validate(config)
        self.rule = rule
        self.i = i
        self.quad = quad
        densities = orientation_set(self.config, rule)
        self.laws = {}
        for k in range(self.config.num_layers):
            if densities[k] <= 0:
                continue
            h_ik = self.config.altitude_diff(i, k)
            for c in ChannelClass:
                rho = self._rho(k, c)
                self.laws[(k, c)] = NearestDistanceLaw(densities[k], h_ik, rho)
        if not self.laws:
            raise DomainError("no candidate layer has positive density")
        self._assoc_cache = {}

    def _rho(self, k: int, c: ChannelClass):
        cfg, i = self.config, self.i

        def rho(x):
            return cfg.class_prob(i, k, c, x)

        return rho

    def candidates(self):
        return sorted(self.laws, key=lambda kc: (kc[0], kc[1].value))

    def competitor_ccdf_product(self, j: int, c: ChannelClass, y):
        """Product over competing (k, c_o) processes of the probability that
        their nearest node loses against a (j, c) candidate at distance y."""
        y = np.asarray(y, dtype=float)
        alpha_main = self.config.alpha(c)
        bias_main = self.config.layers[j].bias
        out = np.ones_like(y)
        for (k, c_o), law in self.laws.items():
            if (k, c_o) == (j, c):
                continue
            radius = candidate_radius(
                self.rule.criterion,
                alpha_main,
                self.config.alpha(c_o),
                y,
                bias_main,
                self.config.layers[k].bias,
            )
            out *= np.exp(-law.cumulative_measure(np.atleast_1d(radius)))
        return out

    def selection_weight(self, j: int, c: ChannelClass, y):
        """Unnormalized main-link density: f_V(y) times the probability of
        beating every competing process.  Integrates to the association
        probability for (j, c)."""
        law = self.laws.get((j, c))
        if law is None:
            return np.zeros_like(np.asarray(y, dtype=float))
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        return law.pdf(y_arr) * self.competitor_ccdf_product(j, c, y_arr)

    def association_probability(self, j: int, c: ChannelClass) -> float:
        key = (j, c)
        if key not in self._assoc_cache:
            law = self.laws.get(key)
            if law is None or law.total_measure == 0.0:
                self._assoc_cache[key] = 0.0
            else:
                h = law.h
                self._assoc_cache[key] = integrate_semi_infinite(
                    lambda y: float(self.selection_weight(j, c, y)[0]), h, self.quad
                )
        return self._assoc_cache[key]

    def report(self) -> AssociationReport:
        probs = {
            (j, c): self.association_probability(j, c) for (j, c) in self.candidates()
        }
        return AssociationReport(
            rx_layer=self.i, rule_tag=self.rule.tag, probabilities=probs
        )

    def main_link_pdf(self, j: int, c: ChannelClass) -> "MainLinkDistribution":
        a = self.association_probability(j, c)
        if a <= 0.0:
            raise DomainError(
                f"association probability is zero for layer {j}, class {c.value}"
            )
        return MainLinkDistribution(self, j, c, a)


class MainLinkDistribution:
    """Main-link distance distribution conditioned on associating with one
    (layer, class) candidate process."""

    def __init__(self, analysis: AssociationAnalysis, j: int, c: ChannelClass, a: float):
        self.analysis = analysis
        self.j = j
        self.c = c
        self.association_probability = a
        self.h = analysis.laws[(j, c)].h
        self._cdf_spline = None

    def pdf(self, y):
        scalar = np.ndim(y) == 0
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        out = self.analysis.selection_weight(self.j, self.c, y_arr) / (
            self.association_probability
        )
        return float(out[0]) if scalar else out

    def _ensure_cdf(self):
        if self._cdf_spline is not None:
            return
        law = self.analysis.laws[(self.j, self.c)]
        hi = max(law.v_max, self.h + 1.0)
        grid = np.linspace(self.h, hi, 4001)
        dens = self.pdf(grid)
        cdf = cumulative_simpson(dens, x=grid, initial=0.0)
        self._cdf_spline = CubicSpline(grid, np.clip(cdf, 0.0, None))
        self._cdf_hi = hi
        self._cdf_total = float(cdf[-1])

    def cdf(self, y):
        self._ensure_cdf()
        scalar = np.ndim(y) == 0
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.clip(self._cdf_spline(np.clip(y_arr, self.h, self._cdf_hi)), 0.0, 1.0)
        out[y_arr <= self.h] = 0.0
        out[y_arr >= self._cdf_hi] = min(self._cdf_total, 1.0)
        return float(out[0]) if scalar else out


def nearest_distance_law(
    config: ValidatedConfig,
    rule: AssociationRule,
    i: int,
    k: int,
    c: ChannelClass,
) -> NearestDistanceLaw:
    """Distance law of the nearest class-c candidate in layer k, as seen by
    a typical layer-i node under the rule's orientation."""
    config = validate(config)
    densities = orientation_set(config, rule)
    if densities[k] <= 0:
        raise DomainError(f"layer {k} hosts no candidates for this orientation")
    h_ik = config.altitude_diff(i, k)

    def rho(x):
        return config.class_prob(i, k, c, x)

    return NearestDistanceLaw(densities[k], h_ik, rho)


def association_probabilities(
    config: ValidatedConfig,
    rule: AssociationRule,
    i: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> AssociationReport:
    """Association probabilities for every candidate (layer, class) of a
    typical layer-i node; entries sum to one within quadrature tolerance."""
    return AssociationAnalysis(config, rule, i, quad).report()


def main_link_pdf(
    config: ValidatedConfig,
    rule: AssociationRule,
    i: int,
    j: int,
    c: ChannelClass,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> MainLinkDistribution:
    """Conditional main-link distance distribution for the (i, j, c) event."""
    return AssociationAnalysis(config, rule, i, quad).main_link_pdf(j, c)
