"""Analytical beacon-overhead model with independent Monte Carlo oracles.

The closed forms predict, for a uniform node field on an A x B rectangle:
the mean source-destination distance D, the mean greedy hop count H built on
the expected one-hop progress of a Poisson neighbor field, the forwarding-op
count chi = lambda * M * Gamma * H, and the response-beacon overhead chi * gamma.
gamma itself (beacons answered per forwarding operation) is measured from
simulation runs, not derived. A seeded Monte Carlo estimator of D provides an
oracle the closed form is validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad


class ModelDomainError(Exception):
    """The hop-count model left its valid domain (expected progress not in (0, 1])."""


def avg_distance(area_a: float, area_b: float) -> float:
    """Expected Euclidean distance between two uniform points in an A x B rectangle.

    Uses a numerically stable rearrangement of the classical closed form (the
    naive grouping cancels catastrophically for thin rectangles):

        D = (1/15) * [3d - a^2/(a+d) - b^2/(b+d)]
          + (1/6) * [(b^2/a) ln((d+a)/b) + (a^2/b) ln((d+b)/a)],  d = hypot(a, b)
    """
    if area_a <= 0 or area_b <= 0:
        raise ValueError(f"area dimensions must be > 0 (got {area_a} x {area_b})")
    a, b = float(area_a), float(area_b)
    d = math.hypot(a, b)
    poly = (3.0 * d - a * a / (a + d) - b * b / (b + d)) / 15.0
    logs = (b * b / a * math.log((d + a) / b) + a * a / b * math.log((d + b) / a)) / 6.0
    return poly + logs


def monte_carlo_distance(area_a: float, area_b: float, samples: int,
                         seed: int) -> tuple[float, float]:
    """Mean pairwise distance over `samples` uniform point pairs, with standard error."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1 (got {samples})")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    remaining = samples
    chunk = 1_000_000
    while remaining > 0:
        m = min(chunk, remaining)
        dx = (rng.uniform(0.0, area_a, m) - rng.uniform(0.0, area_a, m))
        dy = (rng.uniform(0.0, area_b, m) - rng.uniform(0.0, area_b, m))
        dist = np.hypot(dx, dy)
        total += float(dist.sum())
        total_sq += float((dist * dist).sum())
        remaining -= m
    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(variance / samples)


def hop_progress_fraction(radio_range: float, density: float) -> float:
    """Expected per-hop progress as a fraction of the radio range.

    For a Poisson field of density rho, the probability that no neighbor
    offers normalized progress beyond t is exp(-rho A(t)) where
    A(t) = R^2 (arccos t - t sqrt(1 - t^2)) is the area of the disk segment
    beyond the chord at t R. Integrating the survival function gives the
    expectation; it must land in (0, 1] for the model to apply.
    """
    if radio_range <= 0:
        raise ValueError(f"radio_range must be > 0 (got {radio_range})")
    if density <= 0:
        raise ValueError(f"density must be > 0 (got {density})")
    coeff = density * radio_range ** 2

    def survival(t):
        return math.exp(-coeff * (math.acos(t) - t * math.sqrt(1.0 - t * t)))

    integral, _ = quad(survival, 0.0, 1.0, epsabs=1e-9, epsrel=1e-12, limit=200)
    fraction = 1.0 - integral
    if not 0.0 < fraction <= 1.0:
        raise ModelDomainError(
            f"expected per-hop progress {fraction} outside (0, 1]; "
            f"the density {density} is too sparse for the hop-count model")
    return fraction


def avg_hops(distance: float, radio_range: float, density: float) -> float:
    """Mean hop count over a source-destination distance: D / (R * progress fraction)."""
    if distance < 0:
        raise ValueError(f"distance must be >= 0 (got {distance})")
    fraction = hop_progress_fraction(radio_range, density)
    return distance / (radio_range * fraction)


def forwarding_ops(packet_rate: float, flow_count: float, duration: float,
                   hops: float) -> float:
    """Total data forwarding operations: packets generated times mean hops."""
    for name, value in (("packet_rate", packet_rate), ("flow_count", flow_count),
                        ("duration", duration), ("hops", hops)):
        if value < 0:
            raise ValueError(f"{name} must be >= 0 (got {value})")
    return packet_rate * flow_count * duration * hops


def odl_overhead(chi: float, gamma: float) -> float:
    """Response-beacon overhead: forwarding operations times beacons per operation."""
    if chi < 0 or gamma < 0:
        raise ValueError("chi and gamma must be >= 0")
    return chi * gamma


def total_overhead(o_mp: float, o_odl: float) -> float:
    """The two trigger rules are mutually exclusive, so their overheads add."""
    if o_mp < 0 or o_odl < 0:
        raise ValueError("overhead components must be >= 0")
    return o_mp + o_odl


def estimate_gamma(report) -> float:
    """Measured beacons-per-forwarding-op from an adaptive-strategy run."""
    if report.config.strategy != "APU":
        raise ValueError("gamma is defined for APU runs only")
    if report.forwarding_ops == 0:
        raise ValueError("gamma is undefined for a run with no forwarding operations")
    return report.beacons_by_cause()["ODL"] / report.forwarding_ops


@dataclass(frozen=True)
class AnalyticalScenario:
    """Scenario parameters the overhead model consumes."""
    area_a: float
    area_b: float
    node_count: int
    radio_range: float
    packet_rate: float
    flow_count: int
    duration: float
    gamma: float | None = None  # measured or supplied; None leaves O_ODL unpredicted

    def __post_init__(self):
        if self.area_a <= 0 or self.area_b <= 0:
            raise ValueError("area dimensions must be > 0")
        if self.node_count <= 0:
            raise ValueError("node_count must be > 0")

    @property
    def density(self) -> float:
        return self.node_count / (self.area_a * self.area_b)

    @classmethod
    def from_config(cls, config, gamma: float | None = None) -> "AnalyticalScenario":
        return cls(config.area_a, config.area_b, config.node_count,
                   config.radio_range, config.packet_rate, config.flow_count,
                   config.duration, gamma)

    def predict(self) -> dict[str, float | None]:
        """D, H, chi and (when gamma is known) the response-beacon overhead."""
        distance = avg_distance(self.area_a, self.area_b)
        hops = avg_hops(distance, self.radio_range, self.density)
        chi = forwarding_ops(self.packet_rate, self.flow_count, self.duration, hops)
        o_odl = odl_overhead(chi, self.gamma) if self.gamma is not None else None
        return {"mean_distance_m": distance, "mean_hops": hops,
                "forwarding_ops": chi, "gamma": self.gamma,
                "odl_overhead": o_odl}
