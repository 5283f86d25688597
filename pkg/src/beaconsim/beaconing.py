"""The four beacon-update strategies behind one set of decision rules.

PB broadcasts on a fixed interval. DB broadcasts per distance traveled (path
length, not displacement). SB stretches its interval linearly between bounds
as speed falls. APU combines two mutually exclusive triggers: the mobility
prediction rule (beacon only when neighbors' dead-reckoned estimate of this
node has drifted beyond the acceptable error range) and the on-demand learning
rule (answer an overheard data transmission from an unknown sender with a
beacon). Every strategy also emits one initial beacon at startup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mobility import KinematicSnapshot, predict_position

CAUSE_INITIAL = "initial"
CAUSE_PERIODIC = "periodic"
CAUSE_DISTANCE = "distance"
CAUSE_SPEED = "speed"
CAUSE_MP = "MP"
CAUSE_ODL = "ODL"

CAUSES = (CAUSE_INITIAL, CAUSE_PERIODIC, CAUSE_DISTANCE, CAUSE_SPEED,
          CAUSE_MP, CAUSE_ODL)
CAUSE_INDEX = {c: i for i, c in enumerate(CAUSES)}

# Which causes each strategy may legally emit.
STRATEGY_CAUSES = {
    "PB": (CAUSE_INITIAL, CAUSE_PERIODIC),
    "DB": (CAUSE_INITIAL, CAUSE_DISTANCE),
    "SB": (CAUSE_INITIAL, CAUSE_SPEED),
    "APU": (CAUSE_INITIAL, CAUSE_MP, CAUSE_ODL),
}


@dataclass(frozen=True)
class Beacon:
    """Broadcast announcement of a node's advertised kinematics."""
    sender: int
    x: float
    y: float
    vx: float
    vy: float
    timestamp: float
    cause: str
    size: int

    def snapshot(self) -> KinematicSnapshot:
        return KinematicSnapshot(self.x, self.y, self.vx, self.vy, self.timestamp)


def pb_next(interval: float, now: float) -> float:
    """Next periodic beacon time."""
    return now + interval


def sb_interval(speed: float, interval_min: float, interval_max: float,
                v_low: float, v_high: float) -> float:
    """Beacon interval for the current speed: interval_max at/below v_low,
    interval_min at/above v_high, linear in between."""
    if v_high <= v_low:
        return interval_min if speed >= v_high else interval_max
    frac = (speed - v_low) / (v_high - v_low)
    frac = min(max(frac, 0.0), 1.0)
    return interval_max + (interval_min - interval_max) * frac


def sb_next(speed: float, now: float, interval_min: float, interval_max: float,
            v_low: float, v_high: float) -> float:
    return now + sb_interval(speed, interval_min, interval_max, v_low, v_high)


def db_should_beacon(odometer: float, threshold: float) -> bool:
    """Distance rule: beacon once the path traveled since the last own beacon
    strictly exceeds the threshold."""
    return odometer > threshold


def mp_deviation(last_beaconed: KinematicSnapshot, observed_position, now: float) -> float:
    """How far the node's advertised trajectory has drifted from where it
    observes itself now; this is exactly the error its neighbors' prediction
    carries."""
    px, py = predict_position(last_beaconed, now)
    return math.hypot(observed_position[0] - px, observed_position[1] - py)


def mp_should_beacon(last_beaconed: KinematicSnapshot, observed_position,
                     now: float, aer: float) -> bool:
    """Mobility prediction rule: beacon iff the deviation exceeds the
    acceptable error range."""
    return mp_deviation(last_beaconed, observed_position, now) > aer


def odl_should_respond(sender_known: bool) -> bool:
    """On-demand learning rule: answer an overheard *data* transmission with a
    beacon iff the transmitter is absent from the overhearer's table. Beacons
    never trigger a response."""
    return not sender_known


def entry_lifetime(config, announced_speed: float) -> float:
    """Staleness timeout for a freshly upserted entry, by strategy.

    The adaptive strategy is purely prediction-driven (no timeout). Baselines
    time entries out after three of the announcing node's nominal beacon
    intervals; for the distance rule that nominal interval is threshold/speed,
    infinite for a stationary announcer (it will never beacon again, and its
    zero-velocity prediction stays exact).
    """
    strategy = config.strategy
    if strategy == "APU":
        return math.inf
    if strategy == "PB":
        return 3.0 * config.pb_interval
    if strategy == "SB":
        return 3.0 * sb_interval(announced_speed, config.sb_interval_min,
                                 config.sb_interval_max, config.sb_speed_low,
                                 config.sb_vhigh)
    if strategy == "DB":
        if announced_speed <= 0.0:
            return math.inf
        return 3.0 * config.db_threshold / announced_speed
    raise ValueError(f"unknown strategy {strategy!r}")
