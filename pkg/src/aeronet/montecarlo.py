"""Independent Monte Carlo oracle.

Realizes the layered Poisson processes on a disk, marks each link LoS or
NLoS with the location-dependent probability, applies the association rule,
draws Nakagami gains, and records SINR outcomes.  Everything the analytic
pipeline predicts (association frequencies, main-link distances, Laplace
transforms, STP) can be checked against these samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .channel import ChannelClass
from .errors import DomainError, NoCandidate
from .geometry import AssociationAnalysis
from .interference import LaplaceEvaluator, LinkEvent
from .netconfig import AssociationRule, Criterion, Orientation, ValidatedConfig, orientation_set, validate
from .numerics import integrate_semi_infinite

__all__ = [
    "SimSpec",
    "TrialResults",
    "sample_ppp_disk",
    "default_window_radius",
    "run_trials",
    "empirical_laplace",
]

_BATCH_TRIALS = 2000
# Runs discarding more than this fraction of trials are refused rather than
# silently biased.
_MAX_DISCARD_FRACTION = 1e-3


@dataclass(frozen=True)
class SimSpec:
    """Simulation budget: window radius (None picks one from the nearest-
    candidate distance law), trial count, RNG seed, and the typical layer."""

    window_radius: float | None = None
    trials: int = 10000
    seed: int = 0
    typical_node_layer: int = 0

    def __post_init__(self):
        if self.window_radius is not None and self.window_radius <= 0:
            raise DomainError("window_radius must be positive")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")


@dataclass
class TrialResults:
    """Vectorized per-trial outcomes for the non-discarded trials."""

    layer: np.ndarray  # associated layer index
    channel: np.ndarray  # True for LoS main links
    distance: np.ndarray  # main-link distance [m]
    sinr: np.ndarray
    success: np.ndarray  # SINR > beta of the associated pair
    discarded: int
    trials: int
    window_radius: float

    @property
    def discard_fraction(self) -> float:
        return self.discarded / self.trials

    def stp(self) -> float:
        return float(np.mean(self.success))

    def stp_stderr(self) -> float:
        p = self.stp()
        return math.sqrt(max(p * (1.0 - p), 0.0) / len(self.success))

    def association_frequency(self, layer: int, channel_class: ChannelClass) -> float:
        want_los = channel_class is ChannelClass.LOS
        hits = (self.layer == layer) & (self.channel == want_los)
        return float(np.mean(hits))

    def rows(self):
        """(trial, layer, class, distance_m, sinr, success) records."""
        for t in range(len(self.layer)):
            yield (
                t,
                int(self.layer[t]),
                "L" if self.channel[t] else "N",
                float(self.distance[t]),
                float(self.sinr[t]),
                bool(self.success[t]),
            )


def sample_ppp_disk(density: float, radius: float, rng) -> np.ndarray:
    """One Poisson process realization on a disk, as an (n, 2) array."""
    if density < 0:
        raise DomainError("density must be >= 0")
    n = rng.poisson(density * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def default_window_radius(config: ValidatedConfig, rule: AssociationRule, typical_layer: int) -> float:
    """Ten times the 99.9th-percentile distance of the nearest candidate of
    *any* (layer, class) process, so window truncation stays below the
    quoted Monte Carlo tolerances.  The combined measure is used: a single
    sparse process (for example NLoS links in a mostly-LoS environment)
    must not inflate the window on its own."""
    analysis = AssociationAnalysis(config, rule, typical_layer)
    laws = list(analysis.laws.values())
    target = math.log(1000.0)

    def total_measure(v):
        return sum(float(law.cumulative_measure(v)) for law in laws)

    lo = min(law.h for law in laws)
    hi = max(lo, 1.0)
    for _ in range(80):
        if total_measure(hi) >= target:
            break
        hi *= 2.0
    else:
        raise DomainError(
            "cannot size the window: nearest candidate absent too often"
        )
    quantile = brentq(lambda v: total_measure(v) - target, lo, hi)
    return 10.0 * quantile


def _rng_for(spec: SimSpec) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=spec.seed))


def _mark_gains(config: ValidatedConfig, is_los: np.ndarray, rng) -> np.ndarray:
    gains = np.empty(is_los.shape[0])
    m_los = config.fading.m_los
    n_los = int(is_los.sum())
    gains[is_los] = rng.gamma(shape=m_los, scale=1.0 / m_los, size=n_los)
    gains[~is_los] = rng.gamma(shape=1.0, scale=1.0, size=is_los.shape[0] - n_los)
    return gains


def _alphas(config: ValidatedConfig, is_los: np.ndarray) -> np.ndarray:
    return np.where(
        is_los, config.alpha(ChannelClass.LOS), config.alpha(ChannelClass.NLOS)
    )


def _tail_mean(config: ValidatedConfig, rx_layer: int, radius: float) -> float:
    """Mean interference power at a layer-rx_layer node from all
    transmitters beyond the simulation window (Campbell's formula).

    The heavy path-loss tail (alpha close to 2 on LoS links) makes the
    far field matter at any feasible window size; its fluctuations are
    negligible at that range, so adding the mean removes the truncation
    bias without touching the transform machinery under test."""
    total = 0.0
    for k in range(config.num_layers):
        density = config.layers[k].density_tx
        if density == 0.0:
            continue
        power = config.layers[k].power

        def integrand(x):
            rho = config.class_prob(rx_layer, k, ChannelClass.LOS, x)
            return x * (
                rho * x ** (-config.alpha(ChannelClass.LOS))
                + (1.0 - rho) * x ** (-config.alpha(ChannelClass.NLOS))
            )

        total += (
            2.0
            * math.pi
            * density
            * power
            * integrate_semi_infinite(integrand, radius)
        )
    return total


def run_trials(config: ValidatedConfig, rule: AssociationRule, spec: SimSpec) -> TrialResults:
    """Simulate the typical node's association and SINR, trial by trial."""
    config = validate(config)
    i = spec.typical_node_layer
    cand_density = orientation_set(config, rule)
    if not np.any(cand_density > 0):
        raise NoCandidate("no layer hosts association targets for this orientation")
    radius = spec.window_radius or default_window_radius(config, rule, i)
    rng = _rng_for(spec)
    h_i = config.altitude(i)
    area = math.pi * radius * radius
    receiver_oriented = rule.orientation is Orientation.RECEIVER
    tx_layers = [k for k in range(config.num_layers) if config.layers[k].density_tx > 0]
    cand_layers = [k for k in range(config.num_layers) if cand_density[k] > 0]

    if receiver_oriented:
        far_field = _tail_mean(config, i, radius)
    else:
        far_field_by_rx = np.array(
            [
                _tail_mean(config, k, radius) if cand_density[k] > 0 else 0.0
                for k in range(config.num_layers)
            ]
        )

    out_layer, out_los, out_dist, out_sinr, out_succ = [], [], [], [], []
    discarded = 0

    for start in range(0, spec.trials, _BATCH_TRIALS):
        batch = min(_BATCH_TRIALS, spec.trials - start)
        trial_of, layer_of, dist_of, los_of, x_of, y_of = [], [], [], [], [], []
        for k in cand_layers:
            counts = rng.poisson(cand_density[k] * area, size=batch)
            n = int(counts.sum())
            t_ids = np.repeat(np.arange(batch), counts)
            r = radius * np.sqrt(rng.random(n))
            theta = 2.0 * math.pi * rng.random(n)
            h_ik = abs(h_i - config.altitude(k))
            d = np.hypot(r, h_ik)
            rho = np.asarray(config.class_prob(i, k, ChannelClass.LOS, d))
            is_los = rng.random(n) < rho
            trial_of.append(t_ids)
            layer_of.append(np.full(n, k))
            dist_of.append(d)
            los_of.append(is_los)
            x_of.append(r * np.cos(theta))
            y_of.append(r * np.sin(theta))
        trial_of = np.concatenate(trial_of)
        layer_of = np.concatenate(layer_of)
        dist_of = np.concatenate(dist_of)
        los_of = np.concatenate(los_of)
        x_of = np.concatenate(x_of)
        y_of = np.concatenate(y_of)

        bias = np.array([l.bias for l in config.layers])[layer_of]
        if rule.criterion is Criterion.NEAREST:
            value = bias / dist_of
        else:
            value = bias * dist_of ** (-_alphas(config, los_of))
        order = np.lexsort((-value, trial_of))
        sorted_trials = trial_of[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_trials[1:] != sorted_trials[:-1]
        winner_idx = order[first]
        won_trials = sorted_trials[first]
        discarded += batch - len(won_trials)

        w_layer = layer_of[winner_idx]
        w_los = los_of[winner_idx]
        w_dist = dist_of[winner_idx]

        if receiver_oriented:
            gains = _mark_gains(config, los_of, rng)
            power = np.array([l.power for l in config.layers])[layer_of]
            contrib = power * gains * dist_of ** (-_alphas(config, los_of))
            total = np.bincount(trial_of, weights=contrib, minlength=batch)
            interference = total[won_trials] - contrib[winner_idx] + far_field
            main_gain = gains[winner_idx]
            main_power = power[winner_idx]
            rx_layer_arr = np.full(len(won_trials), i)
            tx_layer_arr = w_layer
        else:
            # Interfering Tx processes are independent of the receiver
            # candidates, so they are sampled in a disk around each winner.
            interference = np.zeros(len(won_trials))
            for k in tx_layers:
                counts = rng.poisson(config.layers[k].density_tx * area, size=len(won_trials))
                n = int(counts.sum())
                t_ids = np.repeat(np.arange(len(won_trials)), counts)
                r = radius * np.sqrt(rng.random(n))
                h_rx = np.abs(
                    np.array([config.altitude(int(l)) for l in w_layer])[t_ids]
                    - config.altitude(k)
                )
                d = np.hypot(r, h_rx)
                rho = np.empty(n)
                for rx_l in np.unique(w_layer):
                    mask = w_layer[t_ids] == rx_l
                    rho[mask] = np.asarray(
                        config.class_prob(int(rx_l), k, ChannelClass.LOS, d[mask])
                    )
                is_los = rng.random(n) < rho
                gains = _mark_gains(config, is_los, rng)
                contrib = config.layers[k].power * gains * d ** (-_alphas(config, is_los))
                interference += np.bincount(t_ids, weights=contrib, minlength=len(won_trials))
            interference += far_field_by_rx[w_layer]
            main_gain = _mark_gains(config, w_los, rng)
            main_power = np.full(len(won_trials), config.layers[i].power)
            rx_layer_arr = w_layer
            tx_layer_arr = np.full(len(won_trials), i)

        alphas_main = _alphas(config, w_los)
        sinr = (
            main_power
            * main_gain
            * w_dist ** (-alphas_main)
            / (interference + config.noise_power)
        )
        beta = np.array(
            [config.beta(int(rx), int(tx)) for rx, tx in zip(rx_layer_arr, tx_layer_arr)]
        )
        out_layer.append(w_layer)
        out_los.append(w_los)
        out_dist.append(w_dist)
        out_sinr.append(sinr)
        out_succ.append(sinr > beta)

    if discarded == spec.trials:
        raise NoCandidate("every trial lacked an association target in the window")
    if discarded / spec.trials > _MAX_DISCARD_FRACTION:
        raise NoCandidate(
            f"discard fraction {discarded / spec.trials:.2%} exceeds "
            f"{_MAX_DISCARD_FRACTION:.2%}; enlarge the window"
        )
    return TrialResults(
        layer=np.concatenate(out_layer),
        channel=np.concatenate(out_los),
        distance=np.concatenate(out_dist),
        sinr=np.concatenate(out_sinr),
        success=np.concatenate(out_succ),
        discarded=discarded,
        trials=spec.trials,
        window_radius=radius,
    )


def empirical_laplace(
    config: ValidatedConfig,
    event: LinkEvent,
    s: float,
    spec: SimSpec,
):
    """Sample mean and standard error of exp(-s (I + noise)) under the
    event's exclusion radii.  The interferer processes are the analytic
    model's thinned Poisson processes realized directly."""
    config = validate(config)
    if s < 0:
        raise DomainError("Laplace argument must be >= 0")
    evaluator = LaplaceEvaluator(config, event)
    i = event.rx_layer
    if spec.window_radius is not None:
        radius = spec.window_radius
    else:
        # Beyond the window the tail is replaced by its mean, which is only
        # faithful where s P x^{-alpha} is already small; grow the window
        # with s so that holds at the boundary.
        density_total = max(sum(l.density_tx for l in config.layers), 1e-12)
        power_max = max(l.power for l in config.layers)
        alpha_min = min(config.alpha(c) for c in ChannelClass)
        radius = max(
            10.0 / math.sqrt(math.pi * density_total),
            (100.0 * s * power_max) ** (1.0 / alpha_min) if s > 0 else 0.0,
        )
    rng = _rng_for(spec)
    area = math.pi * radius * radius
    tx_layers = [k for k in range(config.num_layers) if config.layers[k].density_tx > 0]

    far_field = 0.0
    for k in tx_layers:
        for c in ChannelClass:
            lo = max(radius, evaluator.exclusion_radius(k, c), config.altitude_diff(i, k))
            alpha = config.alpha(c)

            def integrand(x, k=k, c=c, alpha=alpha):
                p = config.class_prob(i, k, c, x)
                return x * p * x ** (-alpha)

            far_field += (
                2.0
                * math.pi
                * config.layers[k].density_tx
                * config.layers[k].power
                * integrate_semi_infinite(integrand, lo)
            )

    values = []
    for start in range(0, spec.trials, _BATCH_TRIALS):
        batch = min(_BATCH_TRIALS, spec.trials - start)
        interference = np.full(batch, far_field)
        for k in tx_layers:
            counts = rng.poisson(config.layers[k].density_tx * area, size=batch)
            n = int(counts.sum())
            t_ids = np.repeat(np.arange(batch), counts)
            r = radius * np.sqrt(rng.random(n))
            h_ik = config.altitude_diff(i, k)
            d = np.hypot(r, h_ik)
            rho = np.asarray(config.class_prob(i, k, ChannelClass.LOS, d))
            is_los = rng.random(n) < rho
            lo_los = max(evaluator.exclusion_radius(k, ChannelClass.LOS), h_ik)
            lo_nlos = max(evaluator.exclusion_radius(k, ChannelClass.NLOS), h_ik)
            keep = np.where(is_los, d >= lo_los, d >= lo_nlos)
            gains = _mark_gains(config, is_los[keep], rng)
            contrib = (
                config.layers[k].power
                * gains
                * d[keep] ** (-_alphas(config, is_los[keep]))
            )
            interference += np.bincount(
                t_ids[keep], weights=contrib, minlength=batch
            )
        values.append(np.exp(-s * (interference + config.noise_power)))
    values = np.concatenate(values)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return mean, stderr
