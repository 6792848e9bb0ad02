"""Command-line entry point: run one scenario, sweep them all, or report."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import apply_config_file
from .runner import run_scenario, write_run
from .scenarios import GCC, LOSS_GRID, SCENARIO_NAMES, SCREAM, build_scenario
from .simcore import US_PER_SEC


def _run_dir_name(scenario: str, controller: str, loss_rate: float) -> str:
    if scenario == "loss":
        return f"loss_{controller}_{int(round(loss_rate * 100))}pct"
    return f"{scenario}_{controller}"


def cmd_run(args) -> int:
    spec = build_scenario(args.scenario, args.controller, args.seed, args.loss_rate)
    if args.config:
        spec = apply_config_file(spec, args.config)
    result = run_scenario(spec)
    outdir = Path(args.out) / _run_dir_name(args.scenario, args.controller, spec.link.loss_rate)
    write_run(result, outdir)
    for row in result.summary:
        print(
            f"{spec.name} {args.controller} "
            f"[{row.start_us / US_PER_SEC:.0f}-{row.end_us / US_PER_SEC:.0f}s] "
            f"utilization {row.utilization * 100:.2f}%"
        )
    print(f"wrote {outdir}")
    return 0


def cmd_sweep(args) -> int:
    out = Path(args.out)
    for controller in (GCC, SCREAM):
        for scenario in SCENARIO_NAMES:
            if scenario == "loss":
                for rate in LOSS_GRID:
                    _sweep_one(scenario, controller, rate, args, out)
            else:
                _sweep_one(scenario, controller, 0.0, args, out)
    return 0


def _sweep_one(scenario: str, controller: str, loss_rate: float, args, out: Path) -> None:
    spec = build_scenario(scenario, controller, args.seed, loss_rate)
    if args.config:
        spec = apply_config_file(spec, args.config)
    result = run_scenario(spec)
    outdir = out / _run_dir_name(scenario, controller, loss_rate)
    write_run(result, outdir)
    print(f"wrote {outdir}")


def _load_runs(indir: Path) -> list[dict]:
    runs = []
    for meta_path in sorted(indir.glob("*/meta.json")):
        meta = json.loads(meta_path.read_text())
        with open(meta_path.parent / "summary.csv", newline="") as fh:
            meta["summary"] = list(csv.DictReader(fh))
        runs.append(meta)
    return runs


def _format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(cell)) for cell in col) for col in zip(header, *rows)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths))]
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join(lines)


def cmd_report(args) -> int:
    indir = Path(args.indir)
    runs = _load_runs(indir)
    if not runs:
        print(f"no runs found under {indir}", file=sys.stderr)
        return 1

    sections = []
    resp = [r for r in runs if r["scenario"] == "responsiveness"]
    if resp:
        intervals = [f"{float(s['interval_start_s']):.0f}-{float(s['interval_end_s']):.0f}s" for s in resp[0]["summary"]]
        header = ["controller"] + intervals
        rows = [
            [r["controller"]] + [f"{float(s['utilization']) * 100:.2f}" for s in r["summary"]]
            for r in sorted(resp, key=lambda r: r["controller"])
        ]
        _write_csv(indir / "utilization_responsiveness.csv", header, rows)
        sections.append("Average link utilization (%) per interval\n" + _format_table(header, rows))

    loss = [r for r in runs if r["scenario"] == "loss"]
    if loss:
        rates = sorted({r["loss_rate"] for r in loss})
        header = ["controller"] + [f"{rate * 100:.0f}%" for rate in rates]
        rows = []
        for controller in sorted({r["controller"] for r in loss}):
            row = [controller]
            for rate in rates:
                match = next(r for r in loss if r["controller"] == controller and r["loss_rate"] == rate)
                row.append(f"{float(match['summary'][0]['utilization']) * 100:.2f}")
            rows.append(row)
        _write_csv(indir / "utilization_loss.csv", header, rows)
        sections.append("Capacity utilization (%) under random loss\n" + _format_table(header, rows))

    text = "\n\n".join(sections) + "\n"
    (indir / "report.txt").write_text(text)
    print(text, end="")
    return 0


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)] + [",".join(map(str, row)) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rmcatsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    p_run.add_argument("--controller", required=True, choices=(GCC, SCREAM))
    p_run.add_argument("--seed", type=int, default=1)
    p_run.add_argument("--loss-rate", type=float, default=0.0, help="loss scenario only")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--config", default=None)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run every scenario/controller combination")
    p_sweep.add_argument("--all", action="store_true")
    p_sweep.add_argument("--seed", type=int, default=1)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--config", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report", help="aggregate utilization tables from a sweep")
    p_report.add_argument("--in", dest="indir", required=True)
    p_report.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
