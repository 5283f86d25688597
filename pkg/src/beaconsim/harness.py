"""Experiment drivers: strategy comparison and parameter sweeps.

Runs are independent, so sweeps and comparisons execute in a process pool.
Comparison runs share a master seed: mobility and traffic draw from their own
streams, so node trajectories and packet schedules are identical across
strategies and only beaconing behavior differs (verified by trace hashes).
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import STRATEGIES, ConfigError, ScenarioConfig
from .metrics import MetricsReport, SUMMARY_COLUMNS, _write_csv, emit_report, fmt, summary_row
from .simulation import run_scenario

# Numeric aggregates reported per sweep run (long format).
SWEEP_METRICS = (
    "generated", "delivered", "dropped_void", "dropped_retries", "in_flight",
    "pdr", "mean_delay_s", "mean_hops", "forwarding_ops", "retry_transmissions",
    "beacons_total", "beacons_initial", "beacons_periodic", "beacons_distance",
    "beacons_speed", "beacons_mp", "beacons_odl", "gamma_measured",
    "energy_total_uWs", "unknown_ratio_time_mean", "false_ratio_time_mean",
)

_SWEPT_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


@dataclass
class SweepSpec:
    base: ScenarioConfig
    parameter: str                  # a ScenarioConfig field name, e.g. "speed_max"
    values: list
    replications: int = 1
    strategies: list[str] | None = None  # None: only the base config's strategy

    def __post_init__(self):
        if self.parameter not in _SWEPT_FIELD_TYPES:
            raise ConfigError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if self.replications < 1:
            raise ConfigError("sweep needs at least one replication")
        for s in self.strategies or []:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r} in sweep")

    def configs(self) -> list[tuple[object, int, str, ScenarioConfig]]:
        """(value, replication, strategy, config) for every run of the sweep."""
        strategies = self.strategies or [self.base.strategy]
        runs = []
        for value in self.values:
            for rep in range(self.replications):
                seed = self.base.seed + rep
                for strategy in strategies:
                    cfg = self.base.replace(**{self.parameter: value},
                                            seed=seed, strategy=strategy)
                    runs.append((value, rep, strategy, cfg))
        return runs


def default_workers() -> int:
    return os.cpu_count() or 1


def _run_many(configs, workers: int | None) -> list[MetricsReport]:
    configs = list(configs)
    workers = workers or default_workers()
    if workers <= 1 or len(configs) <= 1:
        return [run_scenario(cfg) for cfg in configs]
    with ProcessPoolExecutor(max_workers=min(workers, len(configs))) as pool:
        return list(pool.map(run_scenario, configs))


def compare(config: ScenarioConfig, strategies,
            workers: int | None = None) -> dict[str, MetricsReport]:
    """Run every strategy on the identical scenario (same seed, hence same
    mobility and traffic); returns reports keyed by strategy."""
    strategies = list(strategies)
    if not strategies:
        raise ConfigError("compare needs at least one strategy")
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r}")
    reports = _run_many([config.replace(strategy=s) for s in strategies], workers)
    return dict(zip(strategies, reports))


def emit_compare(reports: dict[str, MetricsReport], out_dir) -> Path:
    """Side-by-side compare.csv plus one full report directory per strategy."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for strategy, report in reports.items():
        row = summary_row(report)
        rows.append([row[col] for col in SUMMARY_COLUMNS])
        emit_report(report, out / strategy)
    first = next(iter(reports.values()))
    comments = [f"# compare: strategies = {','.join(reports)}",
                f"# seed = {first.config.seed}"]
    path = out / "compare.csv"
    _write_csv(path, comments, list(SUMMARY_COLUMNS), rows)
    return path


def run_sweep(spec: SweepSpec, workers: int | None = None):
    """All sweep runs; returns [(value, replication, strategy, report), ...]."""
    runs = spec.configs()
    reports = _run_many([cfg for *_key, cfg in runs], workers)
    return [(value, rep, strategy, report)
            for (value, rep, strategy, _), report in zip(runs, reports)]


def emit_sweep(spec: SweepSpec, results, out_dir) -> tuple[Path, Path]:
    """Long-format sweep_runs.csv plus per-point mean/std sweep_summary.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comments = [f"# sweep: parameter = {spec.parameter}",
                f"# values = {','.join(str(v) for v in spec.values)}",
                f"# replications = {spec.replications}",
                f"# base_seed = {spec.base.seed}"]

    run_rows = []
    grouped: dict[tuple, dict[str, list]] = {}
    for value, rep, strategy, report in results:
        row = summary_row(report)
        bucket = grouped.setdefault((value, strategy),
                                    {m: [] for m in SWEEP_METRICS})
        for metric in SWEEP_METRICS:
            cell = row[metric]
            run_rows.append([spec.parameter, value, rep, report.config.seed,
                             strategy, metric, cell])
            if cell is not None:
                bucket[metric].append(float(cell))
    runs_path = out / "sweep_runs.csv"
    _write_csv(runs_path, comments,
               ["parameter", "value", "replication", "seed", "strategy",
                "metric", "metric_value"], run_rows)

    summary_rows = []
    for value in spec.values:
        for strategy in (spec.strategies or [spec.base.strategy]):
            bucket = grouped.get((value, strategy))
            if bucket is None:
                continue
            for metric in SWEEP_METRICS:
                samples = bucket[metric]
                mean = sum(samples) / len(samples) if samples else None
                std = (float(np.std(samples, ddof=1))
                       if len(samples) > 1 else None)
                summary_rows.append([spec.parameter, value, strategy, metric,
                                     mean, std, len(samples)])
    summary_path = out / "sweep_summary.csv"
    _write_csv(summary_path, comments,
               ["parameter", "value", "strategy", "metric", "mean", "std", "n"],
               summary_rows)
    return runs_path, summary_path
