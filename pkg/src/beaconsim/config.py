"""Scenario configuration: validated parameters plus TOML scenario-file parsing."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

STRATEGIES = ("PB", "DB", "SB", "APU")
RADIO_MODELS = ("unit-disk", "lossy-disk")


class ConfigError(Exception):
    """Invalid scenario configuration; the message names the offending field."""


@dataclass
class ScenarioConfig:
    # Area, nodes, radio
    area_a: float = 1500.0          # meters, x extent
    area_b: float = 1000.0          # meters, y extent
    node_count: int = 100
    radio_range: float = 250.0      # meters

    # Mobility (random waypoint, uniform speed in [speed_min, speed_max])
    speed_min: float = 1.0          # m/s, > 0
    speed_max: float = 20.0         # m/s
    pause_time: float = 0.0         # seconds at each waypoint

    # Run horizon and traffic
    duration: float = 900.0         # seconds of virtual time
    flow_count: int = 10            # source-destination pairs
    packet_rate: float = 4.0        # packets/s per source (CBR)
    packet_size: int = 512          # bytes
    traffic_start: float = 1.0      # warmup before first packet (lets initial beacons disseminate)
    traffic_stop: float = 0.0       # seconds before the end at which generation ceases

    # Beaconing strategy and parameters
    strategy: str = "APU"
    beacon_size: int = 32           # bytes: id + position + velocity + timestamp
    pb_interval: float = 1.0        # s, PB
    db_threshold: float = 50.0      # m of path traveled, DB
    sb_interval_min: float = 0.5    # s at/above sb_speed_high, SB
    sb_interval_max: float = 5.0    # s at/below sb_speed_low, SB
    sb_speed_low: float = 0.0       # m/s
    sb_speed_high: float | None = None  # m/s; defaults to speed_max
    apu_aer: float | None = None    # m; defaults to 0.1 * radio_range

    # Perturbations / radio model
    localization_sigma: float = 0.0  # m, per-axis Gaussian error on advertised positions
    radio_model: str = "unit-disk"
    loss_probability: float = 0.1    # per-reception, lossy-disk only
    retry_limit: int = 4             # unicast attempts before declaring a false neighbor

    # Link timing (transmit delay = size/bandwidth + processing)
    p2p_rate_bps: float = 11e6
    broadcast_rate_bps: float = 2e6
    processing_delay: float = 0.001  # s per hop

    # Engine cadence
    tick_interval: float = 0.1             # s between node self-checks (MP/DB, purge)
    metrics_sample_interval: float = 1.0   # s between topology-accuracy samples
    max_hops: int = 64                     # TTL guard against localization-noise loops

    seed: int = 1

    # Debug/testing switches (not part of the scenario file schema)
    collect_traces: bool = field(default=False, repr=False)
    initial_beacons: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        self.validate()

    @property
    def aer(self) -> float:
        return 0.1 * self.radio_range if self.apu_aer is None else self.apu_aer

    @property
    def sb_vhigh(self) -> float:
        return self.speed_max if self.sb_speed_high is None else self.sb_speed_high

    def validate(self) -> None:
        def positive(name):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0 (got {getattr(self, name)})")

        def nonnegative(name):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0 (got {getattr(self, name)})")

        for name in ("area_a", "area_b", "node_count", "radio_range", "duration",
                     "tick_interval", "metrics_sample_interval",
                     "pb_interval", "db_threshold", "sb_interval_min", "sb_interval_max",
                     "p2p_rate_bps", "broadcast_rate_bps", "retry_limit", "max_hops"):
            positive(name)
        for name in ("flow_count", "packet_rate", "pause_time", "packet_size",
                     "beacon_size", "localization_sigma", "sb_speed_low",
                     "traffic_start", "traffic_stop", "processing_delay"):
            nonnegative(name)
        if self.speed_max < self.speed_min:
            raise ConfigError(
                f"speed_max must be >= speed_min (got {self.speed_max} < {self.speed_min})")
        # speed_max == 0 means a static scenario; otherwise a strictly positive
        # minimum avoids the zero-speed node that never reaches its waypoint.
        if self.speed_max > 0 and not self.speed_min > 0:
            raise ConfigError(
                f"speed_min must be > 0 in mobile scenarios (got {self.speed_min})")
        if self.speed_min < 0:
            raise ConfigError(f"speed_min must be >= 0 (got {self.speed_min})")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES} (got {self.strategy!r})")
        if self.radio_model not in RADIO_MODELS:
            raise ConfigError(
                f"radio_model must be one of {RADIO_MODELS} (got {self.radio_model!r})")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ConfigError(f"loss_probability must be in [0, 1] (got {self.loss_probability})")
        if self.sb_interval_min > self.sb_interval_max:
            raise ConfigError("sb_interval_min must be <= sb_interval_max")
        if self.sb_vhigh < self.sb_speed_low:
            raise ConfigError("sb_speed_high must be >= sb_speed_low")
        if self.apu_aer is not None and self.apu_aer <= 0:
            raise ConfigError(f"apu_aer must be > 0 (got {self.apu_aer})")
        if self.flow_count > self.node_count * (self.node_count - 1):
            raise ConfigError("flow_count exceeds the number of distinct ordered node pairs")

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def echo_items(self) -> list[tuple[str, object]]:
        """(field, value) pairs for reproducibility headers, in declaration order."""
        return [(f.name, getattr(self, f.name)) for f in dataclasses.fields(self) if f.repr]


# Scenario-file sections: flat keys mirror ScenarioConfig fields; nested
# sections group them for readability. Both spellings are accepted.
_SECTIONS = ("scenario", "mobility", "traffic", "beaconing", "radio", "engine")

_FIELD_NAMES = {f.name for f in dataclasses.fields(ScenarioConfig) if f.repr}


def config_from_mapping(mapping: dict) -> ScenarioConfig:
    flat: dict[str, object] = {}
    for key, value in mapping.items():
        if key == "sweep":
            continue
        if isinstance(value, dict):
            if key not in _SECTIONS:
                raise ConfigError(f"unknown scenario section [{key}]")
            for sub, subval in value.items():
                flat[sub] = subval
        else:
            flat[key] = value
    unknown = sorted(set(flat) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown scenario field {unknown[0]!r}")
    try:
        return ScenarioConfig(**flat)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"scenario file {path} is not valid TOML: {exc}")
    return config_from_mapping(data)


def load_sweep_section(path) -> dict:
    """The raw [sweep] table of a scenario file ({} when absent)."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("[sweep] must be a table")
    return sweep
