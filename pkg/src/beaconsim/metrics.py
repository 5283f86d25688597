"""Run metrics: the per-run report and its CSV serialization.

All CSVs open with `#`-prefixed comment lines echoing the full scenario
configuration and seed, use a stable column order, and format floats with 9
significant digits, so a rerun of the same scenario and seed produces
byte-identical files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .beaconing import CAUSES
from .neighbors import TopologyAccuracySample
from .radio import OP_CLASSES


def fmt(value) -> str:
    """Stable scalar formatting for CSV cells; None becomes an empty field."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.9g}"
    return str(value)


@dataclass
class FlowStats:
    flow: int
    source: int
    destination: int
    generated: int = 0
    delivered: int = 0
    dropped_void: int = 0
    dropped_retries: int = 0
    delay_sum: float = 0.0
    hop_sum: int = 0

    @property
    def in_flight(self) -> int:
        return self.generated - self.delivered - self.dropped_void - self.dropped_retries

    @property
    def mean_delay(self) -> float | None:
        return self.delay_sum / self.delivered if self.delivered else None

    @property
    def mean_hops(self) -> float | None:
        return self.hop_sum / self.delivered if self.delivered else None


@dataclass
class MetricsReport:
    config: object
    beacon_counts: np.ndarray            # (N, len(CAUSES)) int64
    accuracy: list[TopologyAccuracySample]
    flows: list[FlowStats]
    generated: int
    delivered: int
    dropped_void: int
    dropped_retries: int
    forwarding_ops: int
    retry_transmissions: int
    delay_sum: float
    hop_sum: int
    energy: np.ndarray                   # (N, len(OP_CLASSES)) float, uW*s
    energy_counts: np.ndarray            # same shape, event tallies
    energy_bytes: np.ndarray
    mobility_hash: str
    traffic_hash: str
    event_count: int
    extras: dict = field(default_factory=dict)

    # -- derived -----------------------------------------------------------

    @property
    def in_flight(self) -> int:
        return self.generated - self.delivered - self.dropped_void - self.dropped_retries

    @property
    def pdr(self) -> float | None:
        """Delivered over generated; None when the run had no traffic."""
        return self.delivered / self.generated if self.generated else None

    @property
    def mean_delay(self) -> float | None:
        return self.delay_sum / self.delivered if self.delivered else None

    @property
    def mean_hops(self) -> float | None:
        return self.hop_sum / self.delivered if self.delivered else None

    def beacons_by_cause(self) -> dict[str, int]:
        sums = self.beacon_counts.sum(axis=0)
        return {cause: int(sums[i]) for i, cause in enumerate(CAUSES)}

    @property
    def beacons_total(self) -> int:
        return int(self.beacon_counts.sum())

    @property
    def gamma_measured(self) -> float | None:
        """Overheard-response beacons per forwarding operation (adaptive runs)."""
        if self.config.strategy != "APU" or self.forwarding_ops == 0:
            return None
        return self.beacons_by_cause()["ODL"] / self.forwarding_ops

    @property
    def energy_total(self) -> float:
        return float(self.energy.sum())

    def energy_by_class(self) -> dict[str, float]:
        sums = self.energy.sum(axis=0)
        return {op: float(sums[i]) for i, op in enumerate(OP_CLASSES)}

    def mean_accuracy(self) -> tuple[float | None, float | None]:
        """Time-averaged mean unknown and false neighbor ratios."""
        if not self.accuracy:
            return None, None
        unknown = sum(s.unknown_ratio for s in self.accuracy) / len(self.accuracy)
        false = sum(s.false_ratio for s in self.accuracy) / len(self.accuracy)
        return unknown, false


# Aggregate columns shared by metrics.csv, compare and sweep outputs.
SUMMARY_COLUMNS = (
    "strategy", "seed", "generated", "delivered", "dropped_void", "dropped_retries",
    "in_flight", "pdr", "mean_delay_s", "mean_hops", "forwarding_ops",
    "retry_transmissions", "beacons_total", "beacons_initial", "beacons_periodic",
    "beacons_distance", "beacons_speed", "beacons_mp", "beacons_odl",
    "gamma_measured", "energy_total_uWs",
    *(f"energy_{op}_uWs" for op in OP_CLASSES),
    "unknown_ratio_time_mean", "false_ratio_time_mean",
    "mobility_hash", "traffic_hash",
)

_CAUSE_COLUMN = {
    "initial": "beacons_initial", "periodic": "beacons_periodic",
    "distance": "beacons_distance", "speed": "beacons_speed",
    "MP": "beacons_mp", "ODL": "beacons_odl",
}


def summary_row(report: MetricsReport) -> dict[str, object]:
    by_cause = report.beacons_by_cause()
    by_class = report.energy_by_class()
    unknown_mean, false_mean = report.mean_accuracy()
    row = {
        "strategy": report.config.strategy,
        "seed": report.config.seed,
        "generated": report.generated,
        "delivered": report.delivered,
        "dropped_void": report.dropped_void,
        "dropped_retries": report.dropped_retries,
        "in_flight": report.in_flight,
        "pdr": report.pdr,
        "mean_delay_s": report.mean_delay,
        "mean_hops": report.mean_hops,
        "forwarding_ops": report.forwarding_ops,
        "retry_transmissions": report.retry_transmissions,
        "beacons_total": report.beacons_total,
        "gamma_measured": report.gamma_measured,
        "energy_total_uWs": report.energy_total,
        "unknown_ratio_time_mean": unknown_mean,
        "false_ratio_time_mean": false_mean,
        "mobility_hash": report.mobility_hash,
        "traffic_hash": report.traffic_hash,
    }
    for cause, col in _CAUSE_COLUMN.items():
        row[col] = by_cause[cause]
    for op in OP_CLASSES:
        row[f"energy_{op}_uWs"] = by_class[op]
    return row


def _config_header(config) -> list[str]:
    return [f"# {name} = {value}" for name, value in config.echo_items()]


def _write_csv(path: Path, comments: list[str], header: list[str],
               rows: list[list]) -> None:
    try:
        with open(path, "w", newline="") as fh:
            for line in comments:
                fh.write(line + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(cell) for cell in row])
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def read_summary(path) -> dict[str, str]:
    """First data row of a metrics.csv (comment lines skipped), by column name."""
    with open(path, newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows)
        values = next(rows)
    return dict(zip(header, values))


def emit_report(report: MetricsReport, out_dir) -> list[Path]:
    """Write metrics.csv, accuracy.csv, energy.csv, beacons.csv and flows.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comments = _config_header(report.config)
    written = []

    row = summary_row(report)
    path = out / "metrics.csv"
    _write_csv(path, comments, list(SUMMARY_COLUMNS),
               [[row[col] for col in SUMMARY_COLUMNS]])
    written.append(path)

    path = out / "accuracy.csv"
    _write_csv(path, comments,
               ["time_s", "mean_unknown_ratio", "mean_false_ratio",
                "unknown_count", "false_count", "true_neighbor_count"],
               [[s.time, s.unknown_ratio, s.false_ratio, s.unknown_count,
                 s.false_count, s.true_neighbor_count] for s in report.accuracy])
    written.append(path)

    path = out / "energy.csv"
    energy_rows = []
    for node in range(report.energy.shape[0]):
        cells = [node] + [float(report.energy[node, k]) for k in range(len(OP_CLASSES))]
        cells.append(float(report.energy[node].sum()))
        energy_rows.append(cells)
    _write_csv(path, comments,
               ["node", *(f"{op}_uWs" for op in OP_CLASSES), "total_uWs"], energy_rows)
    written.append(path)

    path = out / "beacons.csv"
    beacon_rows = []
    for node in range(report.beacon_counts.shape[0]):
        cells = [node] + [int(report.beacon_counts[node, k]) for k in range(len(CAUSES))]
        cells.append(int(report.beacon_counts[node].sum()))
        beacon_rows.append(cells)
    _write_csv(path, comments, ["node", *CAUSES, "total"], beacon_rows)
    written.append(path)

    path = out / "flows.csv"
    _write_csv(path, comments,
               ["flow", "source", "destination", "generated", "delivered",
                "dropped_void", "dropped_retries", "in_flight",
                "mean_delay_s", "mean_hops"],
               [[f.flow, f.source, f.destination, f.generated, f.delivered,
                 f.dropped_void, f.dropped_retries, f.in_flight,
                 f.mean_delay, f.mean_hops] for f in report.flows])
    written.append(path)
    return written
