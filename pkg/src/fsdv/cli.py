"""Command-line entry point: run scenarios, sweep parameters, check traces."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from fsdv.config import load_scenario, load_sweep_spec
from fsdv.metrics import report_to_json
from fsdv.sim import ConfigError, dump_event_records, run
from fsdv.sweep import (
    PRESET_DESCRIPTIONS,
    SWEEP_METRICS,
    SweepError,
    metric_series,
    preset,
    preset_note,
    run_sweep,
    sweep_table_to_csv,
)
from fsdv.trace import TraceImportError, import_trace

ENV_SEED = "FSDV_SEED"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _seed_override() -> int | None:
    raw = os.environ.get(ENV_SEED)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"{ENV_SEED} must be an integer, got {raw!r}") from e


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    seed = _seed_override()
    if seed is not None:
        config.seed = seed

    playback = None
    if args.trace:
        playback = import_trace(args.trace, config)

    sink: list | None = [] if args.events else None
    report = run(config, trace=playback, event_sink=sink)

    doc = report_to_json(report)
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
        print(f"report written to {args.out}")
    else:
        sys.stdout.write(doc)
    if args.events and sink is not None:
        Path(args.events).write_text(dump_event_records(sink), encoding="utf-8")
        print(f"event log written to {args.events}")

    def fmt(v):
        return "NA" if v is None else f"{v:.4f}"

    print(
        f"rounds={report.rounds} tpr={fmt(report.tpr)} fpr={fmt(report.fpr)} "
        f"plr={report.plr:.4f} throughput={report.avg_throughput:.1f}b/s "
        f"overhead={report.overhead_bits}b"
    )
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    if Path(args.spec).exists():
        spec = load_sweep_spec(args.spec)
        note = None
    else:
        spec = preset(args.spec)
        note = preset_note(args.spec)
    seed = _seed_override()
    if seed is not None:
        spec.base_config.seed = seed

    rows = run_sweep(spec, workers=args.workers)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    csv_path.write_text(sweep_table_to_csv(rows, note=note), encoding="utf-8")
    for metric in SWEEP_METRICS:
        (out_dir / f"{metric}.dat").write_text(
            metric_series(rows, metric), encoding="utf-8"
        )
    if note:
        print(f"note: {note}")
    print(f"sweep table written to {csv_path} ({len(rows)} rows)")
    return EXIT_OK


def _cmd_import_check(args: argparse.Namespace) -> int:
    from fsdv.sim import ScenarioConfig

    playback = import_trace(args.trace, ScenarioConfig())
    print(
        f"trace ok: {len(playback.frames)} timesteps, "
        f"{playback.n_vehicles} vehicles"
    )
    return EXIT_OK


def _cmd_presets(args: argparse.Namespace) -> int:
    for name in sorted(PRESET_DESCRIPTIONS):
        print(f"{name}: {PRESET_DESCRIPTIONS[name]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsdv",
        description="Guard-node Sybil-attack detection simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario from a config file")
    run_p.add_argument("config", help="scenario config file (key = value sections)")
    run_p.add_argument("--trace", help="FCD XML trace replacing synthetic mobility")
    run_p.add_argument("--out", help="write the JSON report here instead of stdout")
    run_p.add_argument("--events", help="dump the event log to this file")
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a parameter sweep")
    sweep_p.add_argument("spec", help="sweep spec file, or a preset name")
    sweep_p.add_argument("--workers", type=int, default=1, help="parallel runs")
    sweep_p.add_argument("--out", default="sweep_out", help="output directory")
    sweep_p.set_defaults(func=_cmd_sweep)

    imp_p = sub.add_parser("import-check", help="validate an FCD trace file")
    imp_p.add_argument("trace")
    imp_p.set_defaults(func=_cmd_import_check)

    pre_p = sub.add_parser("presets", help="list shipped sweep presets")
    pre_p.add_argument("action", nargs="?", default="list", choices=["list"])
    pre_p.set_defaults(func=_cmd_presets)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceImportError, SweepError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
