"""Laplace transforms of the aggregate interference conditioned on the
association event.

The general path evaluates the probability-generating-functional integral
by quadrature per (layer, channel class).  For same-layer interference at
equal altitude with Rayleigh fading, a series in the upper incomplete gamma
function provides a closed form inside its convergence region; the
quadrature path stays the source of truth and the series is an optional
fast path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .channel import ChannelClass
from .errors import DomainError, SeriesNonConvergent
from .netconfig import AssociationRule, Criterion, Orientation, ValidatedConfig, validate
from .numerics import (
    DEFAULT_QUADRATURE,
    DEFAULT_SERIES,
    QuadratureSpec,
    SeriesSpec,
    integrate_semi_infinite,
)

__all__ = [
    "LinkEvent",
    "LaplaceEvaluator",
    "same_layer_decay_rate",
    "closed_form_applicable",
]


@dataclass(frozen=True)
class LinkEvent:
    """The conditioning event: a main link between an rx-layer receiver and
    a tx-layer transmitter of the given class at the given distance."""

    rx_layer: int
    tx_layer: int
    channel_class: ChannelClass
    rule: AssociationRule
    distance: float

    def __post_init__(self):
        if self.distance < 0:
            raise DomainError("main link distance must be >= 0")


def same_layer_decay_rate(config: ValidatedConfig, layer: int) -> float:
    """Exponential decay rate of the equal-altitude LoS probability,
    -sqrt(mu nu) ln(1 - exp(-h^2 / 2 xi^2))."""
    env = config.environment
    h = config.altitude(layer)
    if h <= 0:
        raise DomainError("same-layer decay rate needs a positive altitude")
    return -math.sqrt(env.mu * env.nu) * math.log1p(-math.exp(-(h**2) / (2.0 * env.xi**2)))


class LaplaceEvaluator:
    """Laplace transform of interference plus noise for one link event.

    Receiver-oriented rules exclude interferers closer than the candidate
    radius of the winning link; transmitter-oriented rules exclude nothing.
    """

    def __init__(
        self,
        config: ValidatedConfig,
        event: LinkEvent,
        quad: QuadratureSpec = DEFAULT_QUADRATURE,
        use_closed_form: bool = False,
        series: SeriesSpec = DEFAULT_SERIES,
    ):
        self.config = validate(config)
        self.event = event
        self.quad = quad
        self.use_closed_form = use_closed_form
        self.series = series

    def exclusion_radius(self, k: int, c_o: ChannelClass) -> float:
        """Minimum interferer distance for the k-layer class-c_o process."""
        ev = self.event
        if ev.rule.orientation is Orientation.TRANSMITTER:
            return 0.0
        cfg = self.config
        ratio = cfg.layers[k].bias / cfg.layers[ev.tx_layer].bias
        if ev.rule.criterion is Criterion.NEAREST:
            return ev.distance * ratio
        return (ev.distance ** cfg.alpha(ev.channel_class) * ratio) ** (
            1.0 / cfg.alpha(c_o)
        )

    def _lower_limit(self, k: int, c_o: ChannelClass) -> float:
        return max(
            self.exclusion_radius(k, c_o),
            self.config.altitude_diff(self.event.rx_layer, k),
        )

    def laplace_layer(self, k: int, c_o: ChannelClass, s: float) -> float:
        """Transform of the interference from the k-layer class-c_o process."""
        if s < 0:
            raise DomainError("Laplace argument must be >= 0")
        cfg = self.config
        density_tx = cfg.layers[k].density_tx
        if s == 0.0 or density_tx == 0.0:
            return 1.0
        alpha = cfg.alpha(c_o)
        m = cfg.nakagami_m(c_o)
        power = cfg.layers[k].power
        i = self.event.rx_layer
        lo = self._lower_limit(k, c_o)

        def integrand(x):
            rho = cfg.class_prob(i, k, c_o, x)
            if rho == 0.0:
                return 0.0
            u = s * power * x ** (-alpha) / m
            # 1 - (1+u)^-m, evaluated without cancellation for small u
            fade = -math.expm1(-m * math.log1p(u))
            return x * rho * fade

        exponent = 2.0 * math.pi * density_tx * integrate_semi_infinite(
            integrand, lo, self.quad
        )
        return math.exp(-exponent)

    def laplace_same_layer_closed(
        self, c_o: ChannelClass, s: float, series: SeriesSpec | None = None
    ) -> float:
        """Series closed form for same-layer interference at equal altitude.

        Requires Rayleigh fading on both classes, a positive exclusion
        radius, and s P chi^(-alpha) < 1.  The series is summed with
        compensated summation and stops early once a term is negligible;
        exceeding the term budget returns the truncated sum (the standard
        partial-summation usage), but growing terms raise.
        """
        if series is None:
            series = self.series
        cfg = self.config
        ev = self.event
        i = ev.rx_layer
        if cfg.fading.m_los != 1 or cfg.fading.m_nlos != 1:
            raise DomainError("closed form requires m_los = m_nlos = 1")
        if s < 0:
            raise DomainError("Laplace argument must be >= 0")
        if s == 0.0:
            return 1.0
        density_tx = cfg.layers[i].density_tx
        if density_tx == 0.0:
            return 1.0
        alpha = cfg.alpha(c_o)
        power = cfg.layers[i].power
        chi = self._lower_limit(i, c_o)
        if chi <= 0.0:
            raise DomainError("closed form needs a positive exclusion radius")
        ratio = s * power * chi ** (-alpha)
        if ratio >= 1.0:
            raise DomainError(
                f"series divergent: s P chi^-alpha = {ratio:g} >= 1"
            )
        eta = same_layer_decay_rate(cfg, i)

        terms = []
        partial = 0.0
        prev_mag = math.inf
        for n in range(1, series.max_terms + 1):
            # eta^(n alpha - 2) underflows while Gamma(2 - n alpha, eta chi)
            # overflows for small eta chi; form the product at elevated
            # precision so only the finite combination is rounded to float.
            with mpmath.workdps(40):
                los_part = float(
                    mpmath.power(eta, n * alpha - 2.0)
                    * mpmath.gammainc(2.0 - n * alpha, eta * chi, mpmath.inf)
                )
            if c_o is ChannelClass.LOS:
                coeff = los_part
            else:
                coeff = chi ** (2.0 - n * alpha) / (n * alpha - 2.0) - los_part
            term = (-s * power) ** n * coeff
            mag = abs(term)
            if mag > prev_mag:
                raise SeriesNonConvergent(
                    f"series terms growing at n={n} (|t|={mag:g})"
                )
            prev_mag = mag
            terms.append(term)
            partial = math.fsum(terms)
            if mag < series.convergence_tol * max(abs(partial), 1e-300):
                break
        return math.exp(2.0 * math.pi * density_tx * partial)

    def laplace_total(self, s: float) -> float:
        """exp(-s sigma^2) times the product of per-(layer, class) factors."""
        if s < 0:
            raise DomainError("Laplace argument must be >= 0")
        cfg = self.config
        out = math.exp(-s * cfg.noise_power)
        for k in range(cfg.num_layers):
            if cfg.layers[k].density_tx == 0.0:
                continue
            for c_o in ChannelClass:
                if (
                    self.use_closed_form
                    and k == self.event.rx_layer
                    and closed_form_applicable(cfg, self.event.rule, self.event, s)[0]
                ):
                    out *= self.laplace_same_layer_closed(c_o, s)
                else:
                    out *= self.laplace_layer(k, c_o, s)
        return out


def closed_form_applicable(
    config: ValidatedConfig, rule: AssociationRule, event: LinkEvent, s: float
):
    """Check the conditions under which the same-layer series may replace
    the quadrature transform.  Returns (applicable, reason)."""
    cfg = validate(config)
    if rule.orientation is Orientation.TRANSMITTER:
        return False, "transmitter-oriented exclusion is zero"
    if rule.criterion is not Criterion.STRONGEST:
        return False, "closed form proved for the strongest-power rule"
    if cfg.fading.m_los != 1 or cfg.fading.m_nlos != 1:
        return False, "requires Rayleigh fading on both classes"
    beta = cfg.beta(event.rx_layer, event.tx_layer)
    if beta >= 1.0:
        return False, "target SINR >= 1"
    for layer in cfg.layers:
        if layer.bias != layer.power:
            return False, "requires bias equal to power in every layer"
    i = event.rx_layer
    if cfg.altitude(i) <= 0:
        return False, "same-layer decay rate needs a positive altitude"
    if cfg.altitude_diff(i, i) != 0.0:
        return False, "not an equal-altitude pair"
    evaluator = LaplaceEvaluator(cfg, event)
    for c_o in ChannelClass:
        chi = evaluator._lower_limit(i, c_o)
        if chi <= 0.0:
            return False, "exclusion radius is zero"
        if s * cfg.layers[i].power * chi ** (-cfg.alpha(c_o)) >= 1.0:
            return False, "series convergence condition s P chi^-alpha < 1 violated"
    return True, "all conditions hold"
