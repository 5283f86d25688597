"""Per-node neighbor tables with prediction-based tracking and accuracy metrics.

Every node owns one table of last-announced neighbor kinematics. Entries are
dead-reckoned forward when queried and purged once their predicted position
leaves radio range (baseline strategies add a staleness timeout on top). All
tables share flat numpy arrays so the per-tick purge over every entry in the
network is a single vectorized pass; per-owner dicts map neighbor id to row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mobility import KinematicSnapshot

SOURCE_BEACON = 0
SOURCE_PIGGYBACK = 1


@dataclass(frozen=True)
class TopologyAccuracySample:
    """Network-wide topology accuracy at one sampling instant."""
    time: float
    unknown_ratio: float       # mean over nodes of |truth \ table| / |truth|
    false_ratio: float         # mean over nodes of |table \ truth| / |truth|
    unknown_count: int         # total unknown entries across nodes
    false_count: int           # total stale entries across nodes
    true_neighbor_count: int   # total ground-truth links across nodes


def unknown_neighbor_ratio(table_ids, truth_ids) -> float:
    """Fraction of true current neighbors missing from the table (0 if no truth)."""
    truth = set(truth_ids)
    if not truth:
        return 0.0
    return len(truth - set(table_ids)) / len(truth)


def false_neighbor_ratio(table_ids, truth_ids) -> float:
    """Stale table entries over the count of true current neighbors (0 if no truth).

    Using the true-neighbor count as denominator for both ratios keeps them
    comparable; raw counts are reported alongside so either convention can be
    recomputed offline.
    """
    truth = set(truth_ids)
    if not truth:
        return 0.0
    return len(set(table_ids) - truth) / len(truth)


class NeighborStore:
    """All nodes' neighbor tables over shared growable arrays."""

    def __init__(self, node_count: int, capacity: int = 256):
        self.n = node_count
        self.tables: list[dict[int, int]] = [dict() for _ in range(node_count)]
        self._grow_to(capacity)
        self.active = np.zeros(capacity, dtype=bool)
        self._free: list[int] = list(range(capacity - 1, -1, -1))
        self._high = 0  # rows ever touched, for cheap vectorized slices

    def _grow_to(self, capacity: int) -> None:
        self.owner = np.zeros(capacity, dtype=np.int32)
        self.nbr = np.zeros(capacity, dtype=np.int32)
        self.px = np.zeros(capacity)
        self.py = np.zeros(capacity)
        self.vx = np.zeros(capacity)
        self.vy = np.zeros(capacity)
        self.t = np.zeros(capacity)
        self.expiry = np.zeros(capacity)
        self.source = np.zeros(capacity, dtype=np.int8)

    def _grow(self) -> None:
        old = (self.owner, self.nbr, self.px, self.py, self.vx, self.vy,
               self.t, self.expiry, self.source)
        old_active = self.active
        cap = len(self.owner) * 2
        self._grow_to(cap)
        for new_arr, old_arr in zip((self.owner, self.nbr, self.px, self.py, self.vx,
                                     self.vy, self.t, self.expiry, self.source), old):
            new_arr[: len(old_arr)] = old_arr
        self.active = np.zeros(cap, dtype=bool)
        self.active[: len(old_active)] = old_active
        self._free.extend(range(cap - 1, len(old_active) - 1, -1))

    def _alloc(self) -> int:
        if not self._free:
            self._grow()
        row = self._free.pop()
        self._high = max(self._high, row + 1)
        return row

    # -- table mutation ----------------------------------------------------

    def upsert(self, owner: int, sender: int, snapshot: KinematicSnapshot,
               source: int = SOURCE_BEACON, expiry: float = np.inf) -> bool:
        """Insert or refresh `sender` in `owner`'s table; True if it was unknown."""
        if owner == sender:
            raise ValueError(f"node {owner} cannot be its own neighbor")
        table = self.tables[owner]
        row = table.get(sender)
        was_new = row is None
        if was_new:
            row = self._alloc()
            self.owner[row] = owner
            self.nbr[row] = sender
            self.active[row] = True
            table[sender] = row
        self.px[row] = snapshot.x
        self.py[row] = snapshot.y
        self.vx[row] = snapshot.vx
        self.vy[row] = snapshot.vy
        self.t[row] = snapshot.timestamp
        self.expiry[row] = expiry
        self.source[row] = source
        return was_new

    def upsert_many(self, owners, sender: int, snapshot: KinematicSnapshot,
                    source: int = SOURCE_BEACON, expiry: float = np.inf) -> np.ndarray:
        """One broadcast's worth of upserts: `sender` into every listed table.

        Returns a boolean array marking which owners did not know the sender.
        """
        count = len(owners)
        was_new = np.empty(count, dtype=bool)
        rows = np.empty(count, dtype=np.intp)
        for k in range(count):
            o = int(owners[k])
            table = self.tables[o]
            row = table.get(sender)
            if row is None:
                row = self._alloc()
                self.owner[row] = o
                self.nbr[row] = sender
                self.active[row] = True
                table[sender] = row
                was_new[k] = True
            else:
                was_new[k] = False
            rows[k] = row
        self.px[rows] = snapshot.x
        self.py[rows] = snapshot.y
        self.vx[rows] = snapshot.vx
        self.vy[rows] = snapshot.vy
        self.t[rows] = snapshot.timestamp
        self.expiry[rows] = expiry
        self.source[rows] = source
        return was_new

    def remove(self, owner: int, nbr: int) -> None:
        row = self.tables[owner].pop(nbr)
        self.active[row] = False
        self._free.append(row)

    def _release_rows(self, rows: np.ndarray) -> None:
        self.active[rows] = False
        self._free.extend(int(r) for r in rows)
        for r in rows:
            self.tables[self.owner[r]].pop(int(self.nbr[r]), None)

    # -- queries -------------------------------------------------------------

    def contains(self, owner: int, nbr: int) -> bool:
        return nbr in self.tables[owner]

    def neighbor_ids(self, owner: int) -> list[int]:
        return list(self.tables[owner])

    def entry_snapshot(self, owner: int, nbr: int) -> KinematicSnapshot:
        try:
            row = self.tables[owner][nbr]
        except KeyError:
            raise KeyError(f"node {nbr} not in node {owner}'s neighbor table") from None
        return KinematicSnapshot(self.px[row], self.py[row], self.vx[row],
                                 self.vy[row], self.t[row])

    def entry_source(self, owner: int, nbr: int) -> int:
        return int(self.source[self.tables[owner][nbr]])

    def predicted_position(self, owner: int, nbr: int, now: float) -> tuple[float, float]:
        """Dead-reckoned current position of a table entry."""
        try:
            row = self.tables[owner][nbr]
        except KeyError:
            raise KeyError(f"node {nbr} not in node {owner}'s neighbor table") from None
        dt = now - self.t[row]
        return (float(self.px[row] + dt * self.vx[row]),
                float(self.py[row] + dt * self.vy[row]))

    def predicted_rows(self, rows: np.ndarray, now: float) -> np.ndarray:
        """(len(rows), 2) predicted positions for explicit row indices."""
        dt = now - self.t[rows]
        return np.column_stack((self.px[rows] + dt * self.vx[rows],
                                self.py[rows] + dt * self.vy[rows]))

    def rows_of(self, owner: int) -> np.ndarray:
        return np.fromiter(self.tables[owner].values(), dtype=np.intp,
                           count=len(self.tables[owner]))

    # -- purging ---------------------------------------------------------------

    def purge_out_of_range(self, owner: int, self_position, now: float,
                           radio_range: float) -> list[int]:
        """Remove entries predicted beyond radio range (or expired); spec-facing per-node op."""
        removed = []
        sx, sy = float(self_position[0]), float(self_position[1])
        for nbr, row in list(self.tables[owner].items()):
            dt = now - self.t[row]
            dx = self.px[row] + dt * self.vx[row] - sx
            dy = self.py[row] + dt * self.vy[row] - sy
            if dx * dx + dy * dy > radio_range ** 2 or self.expiry[row] < now:
                self.remove(owner, nbr)
                removed.append(nbr)
        return removed

    def purge_all(self, positions: np.ndarray, now: float,
                  radio_range: float) -> tuple[np.ndarray, np.ndarray]:
        """One vectorized purge pass over every table; returns (owners, neighbors) removed."""
        hi = self._high
        act = self.active[:hi]
        rows = np.flatnonzero(act)
        if rows.size == 0:
            return rows, rows
        dt = now - self.t[rows]
        dx = self.px[rows] + dt * self.vx[rows] - positions[self.owner[rows], 0]
        dy = self.py[rows] + dt * self.vy[rows] - positions[self.owner[rows], 1]
        gone = (dx * dx + dy * dy > radio_range ** 2) | (self.expiry[rows] < now)
        doomed = rows[gone]
        if doomed.size:
            self._release_rows(doomed)
        return self.owner[doomed].copy(), self.nbr[doomed].copy()

    # -- network-wide metrics ---------------------------------------------------

    def table_matrix(self) -> np.ndarray:
        """(N, N) boolean: table_matrix[i, j] iff j is in i's table."""
        mat = np.zeros((self.n, self.n), dtype=bool)
        hi = self._high
        rows = np.flatnonzero(self.active[:hi])
        mat[self.owner[rows], self.nbr[rows]] = True
        return mat

    def accuracy_sample(self, positions: np.ndarray, now: float,
                        radio_range: float) -> TopologyAccuracySample:
        """Compare every table against ground truth from true positions."""
        delta = positions[:, None, :] - positions[None, :, :]
        dist2 = (delta ** 2).sum(axis=2)
        truth = dist2 <= radio_range ** 2
        np.fill_diagonal(truth, False)
        table = self.table_matrix()
        unknown = truth & ~table
        false = table & ~truth
        truth_cnt = truth.sum(axis=1)
        has_truth = truth_cnt > 0
        safe = np.where(has_truth, truth_cnt, 1)
        # Per-node ratios: 0 for nodes with no true neighbors; the false ratio
        # is clamped to 1 (raw counts carry the uncapped information).
        unknown_per_node = np.where(has_truth, unknown.sum(axis=1) / safe, 0.0)
        false_per_node = np.where(
            has_truth, np.minimum(false.sum(axis=1) / safe, 1.0), 0.0)
        unknown_ratio = float(unknown_per_node.mean())
        false_ratio = float(false_per_node.mean())
        return TopologyAccuracySample(
            time=now,
            unknown_ratio=unknown_ratio,
            false_ratio=false_ratio,
            unknown_count=int(unknown.sum()),
            false_count=int(false.sum()),
            true_neighbor_count=int(truth_cnt.sum()),
        )
