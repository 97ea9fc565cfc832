"""Scenario configuration: defaults, validation, and the key/value file format.

A scenario file is a flat YAML mapping whose keys are exactly the field names
of :class:`ScenarioConfig`. Omitted keys take the defaults below; unknown keys
are rejected.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field, fields

import yaml

from .errors import ParseError, ValidationError


class AntennaMode(str, enum.Enum):
    OMNI = "Omni"
    SECTOR120 = "Sector120"
    SECTOR60 = "Sector60"


class Algorithm(str, enum.Enum):
    SET = "SET"
    DRX = "DRX"


class ScenarioClass(str, enum.Enum):
    NON_CONGESTED = "NonCongested"
    CONGESTED = "Congested"


CONGESTION_THRESHOLD_UES = 100


def _default_theta_grid():
    return tuple(round(0.05 * i, 10) for i in range(21))


@dataclass(frozen=True)
class ScenarioConfig:
    # Cell and radio setup
    bandwidth_hz: float = 5e6
    num_rbs: int = 25
    tti_ms: float = 1.0
    sim_duration_s: float = 100.0
    num_ues: int = 100
    inter_enodeb_distance_m: float = 500.0
    ue_speed_mps: float = 4.16
    tx_antenna_gain_dbi: float = 18.0
    rx_antenna_gain_dbi: float = 0.0
    max_tx_power_w: float = 20.0
    max_delay_ms: float = 20.0
    noise_density_dbm_hz: float = -174.0
    antenna_mode: AntennaMode = AntennaMode.OMNI
    shadowing_sigma_db: float = 8.0
    min_distance_m: float = 35.0

    # Traffic
    algorithm: Algorithm = Algorithm.SET
    arrival_rate_pkts_per_s: float = 0.5
    packet_size_bits: int = 8000

    # Trade-off sweep and seeding
    theta_grid: tuple = field(default_factory=_default_theta_grid)
    rng_seed: int = 0

    # Battery and SET sleep windows
    battery_j: float = 1000.0
    e_min_j: float = 1.0
    e_max_j: float = 10.0
    iat_weight_a: float = 0.3
    window_bounds_ms: tuple = (2.0, 64.0)

    # Per-mode power draw and per-bit energy
    circuit_power_w: float = 10.0
    listen_power_w: float = 5.0
    sleep_power_w: float = 0.5
    e_tx_j_per_bit: float = 1e-6
    e_rx_j_per_bit: float = 1e-6

    # DRX baseline timers
    drx_on_duration_ms: float = 4.0
    drx_inactivity_ms: float = 10.0
    drx_short_cycle_ms: float = 20.0
    drx_short_cycle_count: int = 4
    drx_long_cycle_ms: float = 80.0

    def __post_init__(self):
        # Coerce loosely-typed input (YAML lists, plain strings) to canonical types.
        object.__setattr__(self, "antenna_mode", _coerce_enum(AntennaMode, "antenna_mode", self.antenna_mode))
        object.__setattr__(self, "algorithm", _coerce_enum(Algorithm, "algorithm", self.algorithm))
        object.__setattr__(self, "theta_grid", _coerce_floats("theta_grid", self.theta_grid))
        object.__setattr__(self, "window_bounds_ms", _coerce_floats("window_bounds_ms", self.window_bounds_ms))
        for f in fields(self):
            if f.name in _INT_FIELDS:
                object.__setattr__(self, f.name, _coerce_int(f.name, getattr(self, f.name)))
            elif f.name in _FLOAT_FIELDS:
                object.__setattr__(self, f.name, _coerce_float(f.name, getattr(self, f.name)))
        validate(self)

    @property
    def iat_weight_b(self):
        return 1.0 - self.iat_weight_a

    @property
    def num_ttis(self):
        return int(round(self.sim_duration_s * 1000.0 / self.tti_ms))

    @property
    def rb_bandwidth_hz(self):
        return self.bandwidth_hz / self.num_rbs

    @property
    def awake_power_w(self):
        return self.max_tx_power_w + self.circuit_power_w

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, enum.Enum):
                v = v.value
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


_INT_FIELDS = {"num_rbs", "num_ues", "packet_size_bits", "rng_seed", "drx_short_cycle_count"}
_FLOAT_FIELDS = {
    f.name
    for f in fields(ScenarioConfig)
    if f.name not in _INT_FIELDS
    and f.name not in {"antenna_mode", "algorithm", "theta_grid", "window_bounds_ms"}
}
FIELD_NAMES = tuple(f.name for f in fields(ScenarioConfig))


def _coerce_enum(cls, name, value):
    if isinstance(value, cls):
        return value
    for member in cls:
        if str(value).lower() == member.value.lower():
            return member
    allowed = ", ".join(m.value for m in cls)
    raise ValidationError(name, f"{value!r} is not one of {allowed}")


def _coerce_floats(name, value):
    if isinstance(value, str):
        value = [v for v in value.replace(";", ",").split(",") if v.strip()]
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ValidationError(name, f"expected a list of numbers, got {value!r}") from None


def _coerce_int(name, value):
    if isinstance(value, bool):
        raise ValidationError(name, f"expected an integer, got {value!r}")
    try:
        as_float = float(value)
    except (TypeError, ValueError):
        raise ValidationError(name, f"expected an integer, got {value!r}") from None
    if not as_float.is_integer():
        raise ValidationError(name, f"expected an integer, got {value!r}")
    return int(as_float)


def _coerce_float(name, value):
    if isinstance(value, bool):
        raise ValidationError(name, f"expected a number, got {value!r}")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ValidationError(name, f"expected a number, got {value!r}") from None
    if math.isnan(out):
        raise ValidationError(name, "NaN is not allowed")
    return out


def _require(cond, name, message):
    if not cond:
        raise ValidationError(name, message)


def validate(cfg: ScenarioConfig) -> None:
    """Raise :class:`ValidationError` naming the first field that breaks an invariant."""
    _require(cfg.tti_ms > 0, "tti_ms", "must be > 0")
    _require(cfg.sim_duration_s >= 0, "sim_duration_s", "must be >= 0")
    _require(cfg.num_rbs > 0, "num_rbs", "must be > 0")
    _require(cfg.num_ues > 0, "num_ues", "must be > 0")
    _require(cfg.bandwidth_hz > 0, "bandwidth_hz", "must be > 0")
    _require(cfg.inter_enodeb_distance_m > 0, "inter_enodeb_distance_m", "must be > 0")
    _require(cfg.ue_speed_mps > 0, "ue_speed_mps", "must be > 0")
    _require(cfg.max_tx_power_w > 0, "max_tx_power_w", "must be > 0")
    _require(cfg.max_delay_ms >= 0, "max_delay_ms", "must be >= 0")
    _require(cfg.shadowing_sigma_db >= 0, "shadowing_sigma_db", "must be >= 0")
    _require(0 < cfg.min_distance_m < cfg.inter_enodeb_distance_m / math.sqrt(3),
             "min_distance_m", "must lie inside the cell radius")
    _require(cfg.arrival_rate_pkts_per_s >= 0, "arrival_rate_pkts_per_s", "must be >= 0")
    _require(cfg.packet_size_bits > 0, "packet_size_bits", "must be > 0")
    _require(len(cfg.theta_grid) > 0, "theta_grid", "must not be empty")
    _require(all(0.0 <= t <= 1.0 for t in cfg.theta_grid), "theta_grid", "every weight must lie in [0, 1]")
    _require(list(cfg.theta_grid) == sorted(cfg.theta_grid), "theta_grid", "must be sorted ascending")
    _require(0.0 <= cfg.iat_weight_a <= 1.0, "iat_weight_a", "must lie in [0, 1]")
    _require(cfg.battery_j > 0, "battery_j", "must be > 0")
    _require(cfg.e_min_j >= 0, "e_min_j", "must be >= 0")
    _require(cfg.e_min_j < cfg.e_max_j, "e_min_j", "must be < e_max_j")
    _require(cfg.e_max_j <= cfg.battery_j, "e_max_j", "must be <= battery_j")
    _require(len(cfg.window_bounds_ms) == 2, "window_bounds_ms", "must be a (t_min, t_max) pair")
    t_min, t_max = cfg.window_bounds_ms
    _require(0 < t_min < t_max, "window_bounds_ms", "need 0 < t_min < t_max")
    for name in ("circuit_power_w", "listen_power_w", "sleep_power_w", "e_tx_j_per_bit", "e_rx_j_per_bit"):
        _require(getattr(cfg, name) >= 0, name, "must be >= 0")
    _require(cfg.drx_on_duration_ms > 0, "drx_on_duration_ms", "must be > 0")
    _require(cfg.drx_inactivity_ms >= 0, "drx_inactivity_ms", "must be >= 0")
    _require(cfg.drx_short_cycle_ms > cfg.drx_on_duration_ms, "drx_short_cycle_ms", "must exceed the on-duration")
    _require(cfg.drx_short_cycle_count >= 0, "drx_short_cycle_count", "must be >= 0")
    _require(cfg.drx_long_cycle_ms >= cfg.drx_short_cycle_ms, "drx_long_cycle_ms", "must be >= drx_short_cycle_ms")


def classify(cfg: ScenarioConfig) -> ScenarioClass:
    """Congested iff more than 100 UEs; exactly 100 counts as non-congested."""
    if cfg.num_ues > CONGESTION_THRESHOLD_UES:
        return ScenarioClass.CONGESTED
    return ScenarioClass.NON_CONGESTED


def from_mapping(mapping, base: ScenarioConfig | None = None) -> ScenarioConfig:
    if mapping is None:
        mapping = {}
    if not isinstance(mapping, dict):
        raise ParseError(f"scenario must be a key/value mapping, got {type(mapping).__name__}")
    unknown = sorted(set(mapping) - set(FIELD_NAMES))
    if unknown:
        raise ValidationError(unknown[0], "unknown key")
    base = base or ScenarioConfig()
    return dataclasses.replace(base, **mapping)


def load_scenario(source: str) -> ScenarioConfig:
    """Parse a scenario document. Omitted keys take the Table 1 defaults."""
    try:
        data = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed scenario document: {exc}") from None
    return from_mapping(data)


def load_scenario_file(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def dump_scenario(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def parse_override(text: str):
    """Split one ``key=value`` CLI override into a (key, parsed value) pair."""
    if "=" not in text:
        raise ParseError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ParseError(f"cannot parse value for {key}: {exc}") from None
    return key, value


def apply_overrides(cfg: ScenarioConfig, overrides) -> ScenarioConfig:
    changes = dict(parse_override(o) for o in overrides)
    return from_mapping(changes, base=cfg)
