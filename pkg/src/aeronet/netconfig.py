"""Configuration model of the K-layer network, association rules, and the
scenario-file schema.

A scenario file is TOML with sections [environment], [pathloss], [fading],
repeated [[layers]], [association], and [targets].  Unknown keys are
rejected so that typos fail loudly instead of silently using defaults.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
import tomli

from .channel import ChannelClass, Environment, FadingParams, LosModel, PathlossParams
from .errors import AeronetError, DomainError, ValidationError

__all__ = [
    "Orientation",
    "Criterion",
    "AssociationRule",
    "LayerSpec",
    "NetworkConfig",
    "ValidatedConfig",
    "validate",
    "orientation_set",
    "Scenario",
    "load_scenario",
    "parse_scenario_text",
]

SCHEMA_VERSION = 1


class Orientation(enum.Enum):
    RECEIVER = "r"
    TRANSMITTER = "t"


class Criterion(enum.Enum):
    NEAREST = "n"
    STRONGEST = "s"


@dataclass(frozen=True)
class AssociationRule:
    orientation: Orientation
    criterion: Criterion

    @property
    def tag(self) -> str:
        return self.orientation.value + self.criterion.value

    @classmethod
    def from_tag(cls, tag: str) -> "AssociationRule":
        if len(tag) != 2:
            raise DomainError(f"association rule tag must be two letters, got {tag!r}")
        return cls(Orientation(tag[0]), Criterion(tag[1]))


@dataclass(frozen=True)
class LayerSpec:
    """One network layer: common altitude, split Rx/Tx densities, power, bias."""

    altitude: float
    density_rx: float
    density_tx: float
    power: float = 1.0
    bias: float = 1.0

    @property
    def density(self) -> float:
        return self.density_rx + self.density_tx


@dataclass(frozen=True)
class NetworkConfig:
    layers: tuple
    environment: Environment = field(default_factory=Environment)
    pathloss: PathlossParams = field(default_factory=PathlossParams)
    fading: FadingParams = field(default_factory=FadingParams)
    noise_power: float = 0.0
    target_sinr: object = 0.7  # scalar or (K+1)x(K+1) matrix, rx-layer by tx-layer
    los_model: str = "auto"
    constant_los: float = 1.0


def _config_problems(config: NetworkConfig):
    problems = []
    layers = config.layers
    if len(layers) == 0:
        problems.append("no layers")
        return problems
    for idx, layer in enumerate(layers):
        if layer.altitude < 0:
            problems.append(f"layer {idx}: altitude below 0")
        for name in ("density_rx", "density_tx"):
            val = getattr(layer, name)
            if not math.isfinite(val) or val < 0:
                problems.append(f"layer {idx}: {name} must be finite and >= 0")
        if layer.power <= 0:
            problems.append(f"layer {idx}: power must be positive")
        if layer.bias <= 0:
            problems.append(f"layer {idx}: bias must be positive")
    if layers[0].altitude != 0.0:
        for idx, layer in enumerate(layers):
            if layer.altitude == 0.0:
                problems.append(
                    f"layer {idx}: ground layer must be layer 0 when present"
                )
    if not any(l.density_tx > 0 for l in layers):
        problems.append("no layer has positive transmitter density")
    if not any(l.density_rx > 0 for l in layers):
        problems.append("no layer has positive receiver density")

    beta = np.asarray(config.target_sinr, dtype=float)
    if beta.ndim == 0:
        if beta <= 0:
            problems.append("target_sinr must be positive")
    elif beta.shape != (len(layers), len(layers)):
        problems.append(
            f"target_sinr matrix shape {beta.shape} does not match {len(layers)} layers"
        )
    elif np.any(beta <= 0):
        problems.append("target_sinr matrix entries must all be positive")
    if config.noise_power < 0:
        problems.append("noise_power must be >= 0")
    return problems


class ValidatedConfig:
    """Immutable, normalized view of a NetworkConfig with derived helpers."""

    def __init__(self, config: NetworkConfig):
        problems = _config_problems(config)
        if problems:
            raise ValidationError(problems)
        self.raw = config
        self.layers = tuple(config.layers)
        self.environment = config.environment
        self.pathloss = config.pathloss
        self.fading = config.fading
        self.noise_power = float(config.noise_power)
        n = len(self.layers)
        beta = np.asarray(config.target_sinr, dtype=float)
        self._beta = np.full((n, n), float(beta)) if beta.ndim == 0 else beta.copy()
        self._beta.setflags(write=False)
        self.los = LosModel(config.environment, config.los_model, config.constant_los)

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def altitude(self, k: int) -> float:
        return self.layers[k].altitude

    def altitude_diff(self, i: int, j: int) -> float:
        return abs(self.layers[i].altitude - self.layers[j].altitude)

    def beta(self, rx_layer: int, tx_layer: int) -> float:
        return float(self._beta[rx_layer, tx_layer])

    def alpha(self, channel_class: ChannelClass) -> float:
        return self.pathloss.alpha(channel_class)

    def nakagami_m(self, channel_class: ChannelClass) -> int:
        return self.fading.m(channel_class)

    def class_prob(self, rx_layer: int, tx_layer: int, channel_class: ChannelClass, x):
        """Probability that the (rx_layer, tx_layer) link at distance x is
        in the given channel class."""
        return self.los.prob(
            channel_class, self.altitude(rx_layer), self.altitude(tx_layer), x
        )

    def with_layers(self, layers) -> "ValidatedConfig":
        return ValidatedConfig(replace(self.raw, layers=tuple(layers)))

    def with_layer_density_tx(self, k: int, density_tx: float) -> "ValidatedConfig":
        layers = list(self.layers)
        layers[k] = replace(layers[k], density_tx=density_tx)
        return self.with_layers(layers)


def validate(config: NetworkConfig) -> ValidatedConfig:
    """Normalize a config, or raise ValidationError listing every violation."""
    if isinstance(config, ValidatedConfig):
        return config
    return ValidatedConfig(config)


def orientation_set(config: ValidatedConfig, rule: AssociationRule) -> np.ndarray:
    """Per-layer density of the process the typical node selects from:
    transmitters for receiver-oriented rules, receivers otherwise."""
    if rule.orientation is Orientation.RECEIVER:
        return np.array([l.density_tx for l in config.layers])
    return np.array([l.density_rx for l in config.layers])


@dataclass(frozen=True)
class Scenario:
    """A parsed scenario file: validated config, rule, and the typical layer."""

    config: ValidatedConfig
    rule: AssociationRule
    typical_layer: int


_SCHEMA = {
    "environment": {"mu", "nu", "xi", "iota", "kappa", "los_model", "constant_los"},
    "pathloss": {"alpha_los", "alpha_nlos"},
    "fading": {"m_los", "m_nlos"},
    "layers": {"altitude", "density_rx", "density_tx", "power", "bias"},
    "association": {"orientation", "criterion", "typical_layer"},
    "targets": {"sinr", "noise_power"},
}

_ORIENTATIONS = {"r": "r", "receiver": "r", "t": "t", "transmitter": "t"}
_CRITERIA = {"n": "n", "nearest": "n", "s": "s", "strongest": "s"}


def _check_keys(section: str, table: dict, problems: list):
    allowed = _SCHEMA[section]
    for key in table:
        if key not in allowed:
            problems.append(f"[{section}]: unknown key {key!r}")


def parse_scenario_text(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises tomli.TOMLDecodeError on malformed TOML and ValidationError
    (with the complete problem list) on schema or invariant violations.
    """
    doc = tomli.loads(text)
    problems = []

    top_allowed = {"schema_version"} | set(_SCHEMA)
    for key in doc:
        if key not in top_allowed:
            problems.append(f"unknown top-level key {key!r}")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        problems.append(f"unsupported schema_version {version!r}")

    env_tbl = doc.get("environment", {})
    pl_tbl = doc.get("pathloss", {})
    fad_tbl = doc.get("fading", {})
    assoc_tbl = doc.get("association", {})
    targets_tbl = doc.get("targets", {})
    layer_tbls = doc.get("layers", [])
    for name, tbl in (
        ("environment", env_tbl),
        ("pathloss", pl_tbl),
        ("fading", fad_tbl),
        ("association", assoc_tbl),
        ("targets", targets_tbl),
    ):
        _check_keys(name, tbl, problems)
    for tbl in layer_tbls:
        _check_keys("layers", tbl, problems)

    los_model = env_tbl.pop("los_model", "auto")
    constant_los = env_tbl.pop("constant_los", 1.0)

    def build(factory, table, label):
        try:
            return factory(**{k: v for k, v in table.items() if k in _SCHEMA[label]})
        except (AeronetError, TypeError) as exc:
            problems.append(f"[{label}]: {exc}")
            return factory()

    environment = build(Environment, env_tbl, "environment")
    pathloss = build(PathlossParams, pl_tbl, "pathloss")
    fading = build(FadingParams, fad_tbl, "fading")

    layers = []
    for idx, tbl in enumerate(layer_tbls):
        try:
            layers.append(LayerSpec(**tbl))
        except TypeError as exc:
            problems.append(f"[[layers]] {idx}: {exc}")

    orientation_key = str(assoc_tbl.get("orientation", "r")).lower()
    criterion_key = str(assoc_tbl.get("criterion", "n")).lower()
    if orientation_key not in _ORIENTATIONS:
        problems.append(f"[association]: unknown orientation {orientation_key!r}")
        orientation_key = "r"
    if criterion_key not in _CRITERIA:
        problems.append(f"[association]: unknown criterion {criterion_key!r}")
        criterion_key = "n"
    rule = AssociationRule.from_tag(
        _ORIENTATIONS[orientation_key] + _CRITERIA[criterion_key]
    )

    config = NetworkConfig(
        layers=tuple(layers),
        environment=environment,
        pathloss=pathloss,
        fading=fading,
        noise_power=float(targets_tbl.get("noise_power", 0.0)),
        target_sinr=targets_tbl.get("sinr", 0.7),
        los_model=los_model,
        constant_los=float(constant_los),
    )
    try:
        validated = validate(config)
    except ValidationError as exc:
        raise ValidationError(problems + exc.problems) from None
    if problems:
        raise ValidationError(problems)

    default_typical = (
        int(np.argmax(np.array([l.density_rx for l in validated.layers]) > 0))
        if rule.orientation is Orientation.RECEIVER
        else int(np.argmax(np.array([l.density_tx for l in validated.layers]) > 0))
    )
    typical_layer = int(assoc_tbl.get("typical_layer", default_typical))
    if not 0 <= typical_layer < validated.num_layers:
        raise ValidationError([f"[association]: typical_layer {typical_layer} out of range"])
    return Scenario(config=validated, rule=rule, typical_layer=typical_layer)


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())
