"""LoS/NLoS probability models, pathloss parameters, and Nakagami-m fading.

Three LoS models are provided: the exact building-geometry product, the
sigmoid approximation for air-to-ground links (elevation angle in degrees),
and the exponential approximation for air-to-air links.  A dispatcher picks
the model from the link geometry, with overrides for the exact product and
for a constant LoS probability.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import gaussian_q

__all__ = [
    "ChannelClass",
    "Environment",
    "PathlossParams",
    "FadingParams",
    "los_probability_exact",
    "los_probability_a2g",
    "los_probability_a2a",
    "LosModel",
    "sample_fading",
]


class ChannelClass(enum.Enum):
    LOS = "L"
    NLOS = "N"


@dataclass(frozen=True)
class Environment:
    """Built-up environment statistics and the matching sigmoid fit.

    mu: fraction of area covered by buildings, nu: buildings per m^2,
    xi: mean building height [m], (iota, kappa) sigmoid offset/slope.
    """

    mu: float = 0.5
    nu: float = 3e-4
    xi: float = 20.0
    iota: float = 12.0910
    kappa: float = 0.1139

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise DomainError("built-up fraction mu must be in [0, 1]")
        if self.nu < 0:
            raise DomainError("building density nu must be >= 0")
        if self.xi <= 0:
            raise DomainError("mean building height xi must be positive")


@dataclass(frozen=True)
class PathlossParams:
    alpha_los: float = 2.5
    alpha_nlos: float = 3.5

    def __post_init__(self):
        if not 2.0 <= self.alpha_los <= self.alpha_nlos:
            raise DomainError("need 2 <= alpha_los <= alpha_nlos")

    def alpha(self, channel_class: ChannelClass) -> float:
        return self.alpha_los if channel_class is ChannelClass.LOS else self.alpha_nlos


@dataclass(frozen=True)
class FadingParams:
    """Nakagami shape per channel class; NLoS is pinned to Rayleigh."""

    m_los: int = 1
    m_nlos: int = 1

    def __post_init__(self):
        if self.m_los < 1 or int(self.m_los) != self.m_los:
            raise DomainError("m_los must be an integer >= 1")
        if self.m_nlos != 1:
            raise DomainError("m_nlos is fixed to 1 (Rayleigh NLoS)")

    def m(self, channel_class: ChannelClass) -> int:
        return int(self.m_los) if channel_class is ChannelClass.LOS else int(self.m_nlos)


def _check_geometry(h_rx, h_tx, x):
    h_diff = abs(h_rx - h_tx)
    if np.any(np.asarray(x) < h_diff - 1e-9):
        raise DomainError(f"link distance {x!r} below altitude difference {h_diff!r}")
    return h_diff


def los_probability_exact(env: Environment, h_rx, h_tx, x):
    """Exact LoS probability from the building-crossing product.

    The product runs over the floor(sqrt((x^2 - h^2) mu nu) - 1) + 1
    buildings expected under the slant path; an empty product (no buildings
    crossed) gives probability 1.  Ground-to-ground links are always NLoS.
    """
    h_diff = _check_geometry(h_rx, h_tx, x)
    if max(h_rx, h_tx) <= 0.0:
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0

    def scalar(xv):
        r2 = max(xv * xv - h_diff * h_diff, 0.0)
        m = math.floor(math.sqrt(r2 * env.mu * env.nu) - 1.0)
        if m < 0:
            return 1.0
        n = np.arange(m + 1)
        peak = max(h_rx, h_tx) - (n + 0.5) * h_diff / (m + 1)
        return float(np.prod(1.0 - np.exp(-(peak**2) / (2.0 * env.xi**2))))

    if np.ndim(x) == 0:
        return scalar(float(x))
    return np.array([scalar(float(xv)) for xv in np.asarray(x, dtype=float)])


def los_probability_a2g(env: Environment, h_rx, h_tx, x):
    """Sigmoid LoS probability for an air-to-ground link.

    The argument of the sigmoid is the elevation angle in degrees; the
    offset parameter (around 12) is only meaningful on the degree scale.
    """
    if (h_rx > 0) == (h_tx > 0):
        raise DomainError("A2G model needs exactly one endpoint on the ground")
    h_diff = _check_geometry(h_rx, h_tx, x)
    x = np.asarray(x, dtype=float)
    ratio = np.clip(h_diff / np.maximum(x, h_diff), -1.0, 1.0)
    angle_deg = np.degrees(np.arcsin(ratio))
    out = 1.0 / (1.0 + env.iota * np.exp(-env.kappa * (angle_deg - env.iota)))
    return float(out) if out.ndim == 0 else out


# Tolerance for the unequal-altitude A2A base term drifting outside [0, 1].
_A2A_BASE_SLACK = 0.01


def los_probability_a2a(env: Environment, h_rx, h_tx, x):
    """Exponential-family LoS probability for an air-to-air link.

    Equal altitudes use (1 - exp(-h^2/2 xi^2))^(x sqrt(nu mu)); unequal
    altitudes replace the base with a Gaussian-tail difference term.  A
    base outside [0, 1] beyond numerical slack flags an unphysical
    parameter set.
    """
    if h_rx <= 0 or h_tx <= 0:
        raise DomainError("A2A model needs both endpoints above the ground")
    h_diff = _check_geometry(h_rx, h_tx, x)
    x = np.asarray(x, dtype=float)
    if h_diff == 0.0:
        base = 1.0 - math.exp(-(h_rx**2) / (2.0 * env.xi**2))
        exponent = x * math.sqrt(env.nu * env.mu)
    else:
        q_gap = abs(gaussian_q(h_rx / env.xi) - gaussian_q(h_tx / env.xi))
        base = 1.0 - math.sqrt(2.0 * math.pi) * env.xi / h_diff * q_gap
        if base < -_A2A_BASE_SLACK or base > 1.0 + _A2A_BASE_SLACK:
            raise DomainError(f"A2A base term {base:g} outside [0, 1]")
        base = min(max(base, 0.0), 1.0)
        exponent = np.sqrt(np.maximum(x * x - h_diff * h_diff, 0.0) * env.nu * env.mu)
    out = base**exponent
    return float(out) if out.ndim == 0 else out


class LosModel:
    """Dispatcher from link geometry to a LoS model.

    mode "auto" selects the A2G sigmoid, the A2A exponential, or the
    ground-ground zero; "exact" forces the building product everywhere;
    "constant" pins the LoS probability to a fixed value (used to strip
    altitude effects out of the channel).
    """

    def __init__(self, env: Environment, mode: str = "auto", constant_los: float = 1.0):
        if mode not in ("auto", "exact", "constant"):
            raise DomainError(f"unknown LoS model mode {mode!r}")
        if not 0.0 <= constant_los <= 1.0:
            raise DomainError("constant_los must be in [0, 1]")
        self.env = env
        self.mode = mode
        self.constant_los = constant_los

    def los_prob(self, h_rx, h_tx, x):
        """LoS probability for a link of 3-D distance x between altitudes."""
        if self.mode == "constant":
            out = np.full_like(np.asarray(x, dtype=float), self.constant_los)
            return float(out) if out.ndim == 0 else out
        if self.mode == "exact":
            return los_probability_exact(self.env, h_rx, h_tx, x)
        if h_rx <= 0 and h_tx <= 0:
            _check_geometry(h_rx, h_tx, x)
            out = np.zeros_like(np.asarray(x, dtype=float))
            return float(out) if out.ndim == 0 else out
        if h_rx > 0 and h_tx > 0:
            return los_probability_a2a(self.env, h_rx, h_tx, x)
        return los_probability_a2g(self.env, h_rx, h_tx, x)

    def prob(self, channel_class: ChannelClass, h_rx, h_tx, x):
        """Probability of the given class; L and N sum to one exactly."""
        p_los = self.los_prob(h_rx, h_tx, x)
        return p_los if channel_class is ChannelClass.LOS else 1.0 - p_los


def sample_fading(channel_class: ChannelClass, fading: FadingParams, rng, size=None):
    """Unit-mean Nakagami-m power gains: Gamma(shape=m, scale=1/m)."""
    m = fading.m(channel_class)
    return rng.gamma(shape=m, scale=1.0 / m, size=size)
