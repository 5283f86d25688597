"""Node motion: random waypoint walking and linear-kinematics position prediction.

Two views of the same model live here. `RandomWaypointModel`/`advance` step a
single node's kinematics forward by wall-of-time increments (handy for tests
and Monte Carlo checks); `MobilityField` holds every node's current leg as
numpy arrays so the simulator can evaluate all positions at any instant in
O(1) vectorized work, with waypoint arrivals handled as exact-time events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KinematicSnapshot:
    """Announced position/velocity at a given instant, as carried by beacons."""
    x: float
    y: float
    vx: float
    vy: float
    timestamp: float


def predict_position(snapshot: KinematicSnapshot, now: float) -> tuple[float, float]:
    """Dead-reckoned position: last announced position plus elapsed * velocity.

    Exact for straight constant-velocity motion.
    """
    if now < snapshot.timestamp:
        raise ValueError(
            f"prediction time {now} precedes snapshot timestamp {snapshot.timestamp}")
    dt = now - snapshot.timestamp
    return (snapshot.x + dt * snapshot.vx, snapshot.y + dt * snapshot.vy)


@dataclass
class NodeKinematics:
    """A walker's state: where it is, where it is headed, and how fast."""
    position: tuple[float, float]
    velocity: tuple[float, float]
    waypoint: tuple[float, float]
    speed: float
    pause_remaining: float | None = None  # seconds left at the waypoint, or None while moving


def _draw_leg(rng, area_a, area_b, speed_min, speed_max):
    """New uniform waypoint then uniform speed; draw order is part of determinism."""
    wx = rng.uniform(0.0, area_a)
    wy = rng.uniform(0.0, area_b)
    speed = rng.uniform(speed_min, speed_max)
    return wx, wy, speed


def _velocity_toward(position, waypoint, speed):
    dx = waypoint[0] - position[0]
    dy = waypoint[1] - position[1]
    dist = math.hypot(dx, dy)
    if dist == 0.0 or speed == 0.0:
        return (0.0, 0.0)
    return (speed * dx / dist, speed * dy / dist)


class RandomWaypointModel:
    """Classic random waypoint walker over a rectangular area."""

    def __init__(self, area_a: float, area_b: float, speed_min: float,
                 speed_max: float, pause_time: float = 0.0):
        self.area_a = area_a
        self.area_b = area_b
        self.speed_min = speed_min
        self.speed_max = speed_max
        self.pause_time = pause_time

    def spawn(self, rng) -> NodeKinematics:
        x = rng.uniform(0.0, self.area_a)
        y = rng.uniform(0.0, self.area_b)
        if self.speed_max == 0.0:
            return NodeKinematics((x, y), (0.0, 0.0), (x, y), 0.0)
        wx, wy, speed = _draw_leg(rng, self.area_a, self.area_b,
                                  self.speed_min, self.speed_max)
        node = NodeKinematics((x, y), (0.0, 0.0), (wx, wy), speed)
        node.velocity = _velocity_toward(node.position, node.waypoint, speed)
        return node

    def advance(self, node: NodeKinematics, dt: float, rng) -> NodeKinematics:
        """Walk forward dt seconds, consuming pauses and waypoint arrivals in order."""
        if dt < 0:
            raise ValueError(f"dt must be >= 0 (got {dt})")
        x, y = node.position
        vx, vy = node.velocity
        wx, wy = node.waypoint
        speed = node.speed
        pause = node.pause_remaining
        remaining = dt
        if speed == 0.0 and pause is None:
            return NodeKinematics((x, y), (0.0, 0.0), (wx, wy), 0.0)
        while remaining > 0.0:
            if pause is not None:
                if pause > remaining:
                    pause -= remaining
                    remaining = 0.0
                else:
                    remaining -= pause
                    pause = None
                    wx, wy, speed = _draw_leg(rng, self.area_a, self.area_b,
                                              self.speed_min, self.speed_max)
                    vx, vy = _velocity_toward((x, y), (wx, wy), speed)
            else:
                time_to_wp = math.hypot(wx - x, wy - y) / speed
                if time_to_wp > remaining:
                    x += vx * remaining
                    y += vy * remaining
                    remaining = 0.0
                else:
                    x, y = wx, wy
                    remaining -= time_to_wp
                    vx = vy = 0.0
                    if self.pause_time > 0.0:
                        pause = self.pause_time
                    else:
                        wx, wy, speed = _draw_leg(rng, self.area_a, self.area_b,
                                                  self.speed_min, self.speed_max)
                        vx, vy = _velocity_toward((x, y), (wx, wy), speed)
        return NodeKinematics((x, y), (vx, vy), (wx, wy), speed, pause)


class MobilityField:
    """All nodes' current legs as arrays, driven by exact waypoint-arrival events.

    Between events every node moves in a straight line, so positions at any
    instant follow from `origin + velocity * (t - leg_start)` without per-tick
    integration; that also keeps neighbor-side prediction exact on legs.
    """

    def __init__(self, config, rng, positions=None, plans=None):
        n = config.node_count
        self.config = config
        self.n = n
        self.plans = {i: list(p) for i, p in (plans or {}).items()}
        if positions is not None:
            pos = np.asarray(positions, dtype=float).reshape(n, 2).copy()
        else:
            pos = np.column_stack([rng.uniform(0.0, config.area_a, size=n),
                                   rng.uniform(0.0, config.area_b, size=n)])
        self.origin = pos
        self.leg_start = np.zeros(n)
        self.velocity = np.zeros((n, 2))
        self.speed = np.zeros(n)
        self.target = pos.copy()
        self.paused = np.zeros(n, dtype=bool)

    def start_legs(self, now: float, rng) -> list[tuple[float, int]]:
        """Draw the first leg of every mobile node; returns waypoint event times."""
        events = []
        for i in range(self.n):
            t = self._begin_leg(i, now, rng)
            if t is not None:
                events.append((t, i))
        return events

    def _next_leg_params(self, i, rng):
        plan = self.plans.get(i)
        if plan:
            return plan.pop(0)
        cfg = self.config
        if cfg.speed_max == 0.0:
            return None
        return _draw_leg(rng, cfg.area_a, cfg.area_b, cfg.speed_min, cfg.speed_max)

    def _begin_leg(self, i, now, rng) -> float | None:
        leg = self._next_leg_params(i, rng)
        self.leg_start[i] = now
        self.paused[i] = False
        if leg is None:
            self.velocity[i] = 0.0
            self.speed[i] = 0.0
            self.target[i] = self.origin[i]
            return None
        wx, wy, speed = leg
        self.target[i] = (wx, wy)
        self.speed[i] = speed
        dx = wx - self.origin[i, 0]
        dy = wy - self.origin[i, 1]
        dist = math.hypot(dx, dy)
        if dist == 0.0 or speed == 0.0:
            self.velocity[i] = 0.0
            return now  # zero-length leg: arrive immediately
        self.velocity[i] = (speed * dx / dist, speed * dy / dist)
        return now + dist / speed

    def handle_waypoint(self, i: int, now: float, rng) -> float | None:
        """Arrival or pause-end for node i; returns the next event time (None if static)."""
        if self.paused[i]:
            return self._begin_leg(i, now, rng)
        # Arrival: snap exactly onto the waypoint.
        self.origin[i] = self.target[i]
        self.leg_start[i] = now
        self.velocity[i] = 0.0
        self.speed[i] = 0.0
        if self.config.pause_time > 0.0:
            self.paused[i] = True
            return now + self.config.pause_time
        return self._begin_leg(i, now, rng)

    def positions_at(self, now: float) -> np.ndarray:
        return self.origin + self.velocity * (now - self.leg_start)[:, None]

    def position_of(self, i: int, now: float) -> np.ndarray:
        return self.origin[i] + self.velocity[i] * (now - self.leg_start[i])

    def true_position(self, node_id: int, now: float) -> tuple[float, float]:
        if not 0 <= node_id < self.n:
            raise KeyError(f"unknown node id {node_id}")
        x, y = self.position_of(node_id, now)
        return (float(x), float(y))
