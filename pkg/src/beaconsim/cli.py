"""Command line front end: run, compare, sweep and predict subcommands."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import AnalyticalScenario, ModelDomainError
from .config import ConfigError, STRATEGIES, load_scenario, load_sweep_section
from .harness import SweepSpec, compare, emit_compare, emit_sweep, run_sweep
from .metrics import emit_report, fmt, read_summary, _write_csv
from .simulation import run_scenario

_INT_FIELDS = {"node_count", "flow_count", "packet_size", "beacon_size",
               "retry_limit", "max_hops", "seed"}


def _parse_value(field: str, raw: str):
    return int(raw) if field in _INT_FIELDS else float(raw)


def _cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    report = run_scenario(config)
    emit_report(report, args.out)
    pdr = fmt(report.pdr) if report.generated else "no flows"
    print(f"run complete: {report.beacons_total} beacons, "
          f"{report.generated} packets generated, PDR {pdr}; "
          f"reports in {args.out}")
    return 0


def _cmd_compare(args) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    strategies = args.strategies.split(",") if args.strategies else list(STRATEGIES)
    reports = compare(config, strategies, workers=args.workers)
    emit_compare(reports, args.out)
    hashes = {r.mobility_hash for r in reports.values()}
    note = "identical" if len(hashes) == 1 else "DIFFERENT (stream separation broken)"
    print(f"compared {', '.join(reports)}; mobility traces {note}; "
          f"results in {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    section = load_sweep_section(args.scenario)
    parameter = args.param or section.get("parameter")
    if not parameter:
        raise ConfigError("sweep needs --param or a [sweep] section with 'parameter'")
    if args.values:
        values = [_parse_value(parameter, v) for v in args.values.split(",")]
    else:
        values = section.get("values")
        if not values:
            raise ConfigError("sweep needs --values or [sweep] 'values'")
    replications = args.replications or section.get("replications", 1)
    if args.strategies:
        strategies = args.strategies.split(",")
    else:
        strategies = section.get("strategies")
    spec = SweepSpec(config, parameter, list(values), int(replications), strategies)
    results = run_sweep(spec, workers=args.workers)
    runs_path, summary_path = emit_sweep(spec, results, args.out)
    print(f"swept {parameter} over {len(spec.values)} values x "
          f"{spec.replications} replications ({len(results)} runs); "
          f"wrote {runs_path} and {summary_path}")
    return 0


def _cmd_predict(args) -> int:
    config = load_scenario(args.scenario)
    measured: dict[str, str] = {}
    gamma = args.gamma
    if args.run:
        measured = read_summary(Path(args.run) / "metrics.csv")
        if gamma is None and measured.get("gamma_measured"):
            gamma = float(measured["gamma_measured"])
    scenario = AnalyticalScenario.from_config(config, gamma)
    predicted = scenario.predict()

    def sim(key):
        return measured.get(key, "")

    o_mp_sim = sim("beacons_mp")
    o_odl_sim = sim("beacons_odl")
    o_apu_pred = None
    if o_mp_sim and predicted["odl_overhead"] is not None:
        o_apu_pred = float(o_mp_sim) + predicted["odl_overhead"]
    o_apu_sim = ""
    if o_mp_sim and o_odl_sim:
        o_apu_sim = str(int(o_mp_sim) + int(o_odl_sim))

    rows = [
        ("mean_distance_m", predicted["mean_distance_m"], ""),
        ("mean_hops", predicted["mean_hops"], sim("mean_hops")),
        ("forwarding_ops", predicted["forwarding_ops"], sim("forwarding_ops")),
        ("gamma", predicted["gamma"], sim("gamma_measured")),
        ("odl_overhead", predicted["odl_overhead"], o_odl_sim),
        ("mp_overhead", None, o_mp_sim),
        ("total_overhead", o_apu_pred, o_apu_sim),
    ]
    width = max(len(name) for name, *_ in rows)
    print(f"{'quantity'.ljust(width)}  {'predicted':>14}  {'simulated':>14}")
    for name, pred, simulated in rows:
        print(f"{name.ljust(width)}  {fmt(pred):>14}  {str(simulated):>14}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "predict.csv",
                   [f"# scenario = {args.scenario}", f"# run = {args.run or ''}"],
                   ["quantity", "predicted", "simulated"],
                   [[name, pred, simulated] for name, pred, simulated in rows])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beaconsim",
        description="Discrete-event simulator for beacon-update strategies "
                    "in geographic routing")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one scenario")
    run_p.add_argument("--scenario", required=True, help="TOML scenario file")
    run_p.add_argument("--out", required=True, help="output directory for CSVs")
    run_p.add_argument("--seed", type=int, help="override the scenario seed")
    run_p.set_defaults(func=_cmd_run)

    cmp_p = sub.add_parser("compare", help="run several strategies on one scenario")
    cmp_p.add_argument("--scenario", required=True)
    cmp_p.add_argument("--out", required=True)
    cmp_p.add_argument("--seed", type=int)
    cmp_p.add_argument("--strategies", help="comma list (default: all four)")
    cmp_p.add_argument("--workers", type=int, help="parallel runs (default: cores)")
    cmp_p.set_defaults(func=_cmd_compare)

    sweep_p = sub.add_parser("sweep", help="vary one parameter over replications")
    sweep_p.add_argument("--scenario", required=True)
    sweep_p.add_argument("--out", required=True)
    sweep_p.add_argument("--seed", type=int)
    sweep_p.add_argument("--param", help="ScenarioConfig field to sweep")
    sweep_p.add_argument("--values", help="comma list of values")
    sweep_p.add_argument("--replications", type=int)
    sweep_p.add_argument("--strategies", help="comma list of strategies")
    sweep_p.add_argument("--workers", type=int)
    sweep_p.set_defaults(func=_cmd_sweep)

    pred_p = sub.add_parser("predict", help="analytical overhead model for a scenario")
    pred_p.add_argument("--scenario", required=True)
    pred_p.add_argument("--run", help="run directory with metrics.csv to compare against")
    pred_p.add_argument("--gamma", type=float, help="beacons per forwarding op")
    pred_p.add_argument("--out", help="also write predict.csv here")
    pred_p.set_defaults(func=_cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ModelDomainError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
