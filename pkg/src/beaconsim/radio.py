"""Radio layer: reachability, reception loss, localization error, energy accounting.

Reachability is a closed ball of radius R (distance exactly R still receives).
The lossy-disk model adds an independent Bernoulli loss per reception. Energy
follows the measured per-operation linear model: cost = slope * size + fixed,
in microwatt-seconds, with one (slope, fixed) row per operation class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Operation classes, in ledger column order.
P2P_SEND = "p2p_send"
BROADCAST_SEND = "broadcast_send"
P2P_RECV = "p2p_recv"
BROADCAST_RECV = "broadcast_recv"
PROMISCUOUS_RECV = "promiscuous_recv"
PROMISCUOUS_DISCARD = "promiscuous_discard"

OP_CLASSES = (P2P_SEND, BROADCAST_SEND, P2P_RECV, BROADCAST_RECV,
              PROMISCUOUS_RECV, PROMISCUOUS_DISCARD)

# (slope uW*s/byte, fixed uW*s) per operation class.
ENERGY_COEFFS = {
    P2P_SEND: (0.48, 431.0),
    BROADCAST_SEND: (2.1, 272.0),
    P2P_RECV: (0.12, 316.0),
    BROADCAST_RECV: (0.26, 50.0),
    PROMISCUOUS_RECV: (0.12, 83.0),
    PROMISCUOUS_DISCARD: (0.11, 54.0),
}

_OP_INDEX = {op: i for i, op in enumerate(OP_CLASSES)}


def energy_cost(op_class: str, size: int) -> float:
    """Energy in uW*s for one operation on a packet of `size` bytes."""
    if op_class not in ENERGY_COEFFS:
        raise KeyError(f"unknown energy operation class {op_class!r}")
    if size < 0:
        raise ValueError(f"size must be >= 0 (got {size})")
    slope, fixed = ENERGY_COEFFS[op_class]
    return slope * size + fixed


@dataclass(frozen=True)
class RadioModel:
    kind: str = "unit-disk"          # "unit-disk" | "lossy-disk"
    range: float = 250.0             # meters
    loss_probability: float = 0.0    # per-reception, lossy-disk only


@dataclass(frozen=True)
class LocalizationErrorModel:
    sigma: float = 0.0  # meters, per-axis Gaussian std


def in_range(p, q, model: RadioModel) -> bool:
    """Geometric reachability before any loss draw (closed ball)."""
    return math.hypot(p[0] - q[0], p[1] - q[1]) <= model.range


def observed_position(true_pos, model: LocalizationErrorModel, rng) -> tuple[float, float]:
    """The position a node believes it has and advertises; exact when sigma=0."""
    if model.sigma == 0.0:
        return (float(true_pos[0]), float(true_pos[1]))
    noise = rng.normal(0.0, model.sigma, size=2)
    return (float(true_pos[0] + noise[0]), float(true_pos[1] + noise[1]))


class EnergyLedger:
    """Per-node accumulators of uW*s by operation class.

    Alongside the float accumulators it keeps integer (count, byte) tallies per
    cell, so a run's totals can be recomputed and audited from the tallies.
    With record_events=True every single charge is logged (tests only; a long
    run logs millions of events).
    """

    def __init__(self, node_count: int, record_events: bool = False):
        self.energy = np.zeros((node_count, len(OP_CLASSES)))
        self.counts = np.zeros((node_count, len(OP_CLASSES)), dtype=np.int64)
        self.bytes = np.zeros((node_count, len(OP_CLASSES)), dtype=np.int64)
        self.events = [] if record_events else None

    def charge(self, op_class: str, node: int, size: int) -> None:
        col = _OP_INDEX[op_class]
        self.energy[node, col] += energy_cost(op_class, size)
        self.counts[node, col] += 1
        self.bytes[node, col] += size
        if self.events is not None:
            self.events.append((op_class, node, size))

    def charge_many(self, op_class: str, nodes, size: int) -> None:
        nodes = np.asarray(nodes, dtype=np.intp)
        if nodes.size == 0:
            return
        col = _OP_INDEX[op_class]
        np.add.at(self.energy, (nodes, col), energy_cost(op_class, size))
        np.add.at(self.counts, (nodes, col), 1)
        np.add.at(self.bytes, (nodes, col), size)
        if self.events is not None:
            self.events.extend((op_class, int(i), size) for i in nodes)

    def total(self) -> float:
        return float(self.energy.sum())

    def totals_by_class(self) -> dict[str, float]:
        sums = self.energy.sum(axis=0)
        return {op: float(sums[i]) for i, op in enumerate(OP_CLASSES)}


class RadioEnvironment:
    """Reachability queries and energy charging for one run."""

    def __init__(self, model: RadioModel, ledger: EnergyLedger, rng):
        self.model = model
        self.ledger = ledger
        self.rng = rng
        self._lossy = model.kind == "lossy-disk"

    def reachable_mask(self, positions: np.ndarray, sender: int) -> np.ndarray:
        """Nodes whose reception succeeds for a transmission from `sender` now.

        Loss draws (lossy-disk) are taken in ascending node order for the
        geometrically reachable candidates only, keeping the radio stream
        deterministic and independent of unrelated events.
        """
        delta = positions - positions[sender]
        dist2 = delta[:, 0] ** 2 + delta[:, 1] ** 2
        mask = dist2 <= self.model.range ** 2
        mask[sender] = False
        if self._lossy and mask.any():
            draws = self.rng.random(int(mask.sum()))
            kept = draws >= self.model.loss_probability
            mask[np.flatnonzero(mask)] = kept
        return mask
