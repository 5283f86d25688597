"""Greedy geographic forwarding over predicted neighbor positions.

The forwarder relays a packet to the table entry whose dead-reckoned current
position is closest to the destination, provided that is strictly closer than
the forwarder itself; with no such candidate the packet is stuck at a local
maximum (void). Recovery modes are deliberately absent: voids are counted and
reported, keeping beaconing comparisons clean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mobility import KinematicSnapshot

# Forwarding outcomes.
FORWARDED = "forwarded"
DELIVERED = "delivered"
DROPPED_VOID = "dropped-void"
DROPPED_RETRIES = "dropped-retries"


@dataclass
class DataPacket:
    packet_id: int
    flow_id: int
    source: int
    destination: int
    dest_x: float            # destination position at creation time
    dest_y: float
    size: int
    created: float
    piggyback: KinematicSnapshot | None = None  # sender kinematics, refreshed per attempt
    hops: int = 0
    trace: list = field(default_factory=list)   # transmitting nodes, in order
    progress: list = field(default_factory=list)  # decision distances (trace debugging)


def select_next_hop(store, owner: int, self_position, dest_position,
                    now: float) -> int | None:
    """Greedy choice among entries strictly closer to the destination.

    Returns the neighbor id with minimal predicted distance to the
    destination, ties broken toward the lowest id; None at a void.
    """
    rows = store.rows_of(owner)
    if rows.size == 0:
        return None
    pred = store.predicted_rows(rows, now)
    dx = pred[:, 0] - dest_position[0]
    dy = pred[:, 1] - dest_position[1]
    d2 = dx * dx + dy * dy
    sx = self_position[0] - dest_position[0]
    sy = self_position[1] - dest_position[1]
    self_d2 = sx * sx + sy * sy
    closer = d2 < self_d2
    if not closer.any():
        return None
    best = d2[closer].min()
    ids = store.nbr[rows[closer]]
    return int(ids[d2[closer] == best].min())
