"""``bearing-search`` command line: simulate, sweep and plot.

Exit codes: 0 success, 2 invalid input (bad config, arguments or CSV),
3 controller fault during a run.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import svgplot
from .config import load_config
from .errors import ControllerFault, InvalidInput
from .simulator import (
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    read_table_csv,
    run,
    sweep_beta,
    write_summary_json,
    write_sweep_csv,
    write_trace_csv,
)

EXIT_OK, EXIT_INVALID, EXIT_FAULT = 0, 2, 3

_PLOT_COLUMNS = {
    "trajectory": ("x", "y", "p_hat_x", "p_hat_y"),
    "est_error": ("t", "e_est"),
    "range": ("t", "r_true", "r_hat"),
    "sweep": ("beta", "mean_search_time"),
}


def parse_beta_range(spec: str) -> List[float]:
    """``"start:stop:step"`` with an inclusive stop, e.g. ``0:6:0.5`` gives 13 values."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise InvalidInput(f"beta range must look like start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise InvalidInput(f"beta range has a non-numeric field: {spec!r}") from None
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise InvalidInput(f"beta range must be finite: {spec!r}")
    if step <= 0:
        raise InvalidInput(f"beta step must be > 0, got {step}")
    if stop < start:
        raise InvalidInput(f"empty beta range {spec!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def summary_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    scenario = cfg.scenario(seed=args.seed)
    try:
        trace = run(scenario)
    except ControllerFault as exc:
        if exc.trace is not None and exc.trace.records:
            write_trace_csv(exc.trace, args.out)
            print(f"partial trace written to {args.out}", file=sys.stderr)
        print(f"controller fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    write_trace_csv(trace, args.out)
    write_summary_json(trace, summary_path(args.out), scenario)
    return EXIT_OK


def cmd_sweep(args) -> int:
    betas = parse_beta_range(args.beta)
    if args.runs < 1:
        raise InvalidInput(f"--runs must be >= 1, got {args.runs}")
    if args.workers < 1:
        raise InvalidInput(f"--workers must be >= 1, got {args.workers}")
    scenario = load_config(args.config).scenario()
    rows = sweep_beta(scenario, betas, range(args.runs), workers=args.workers)
    write_sweep_csv(rows, args.out)
    faults = sum(r.faults for r in rows)
    if faults:
        print(f"{faults} run(s) ended in a controller fault and were left out of the means",
              file=sys.stderr)
    return EXIT_OK


def _target_for(args) -> Optional[Sequence[float]]:
    if args.target is not None:
        try:
            x, y = (float(v) for v in args.target.split(","))
        except ValueError:
            raise InvalidInput(f"--target must be x,y, got {args.target!r}") from None
        return x, y
    side = summary_path(args.input)
    if side.is_file():
        try:
            target = json.loads(side.read_text()).get("target")
        except (json.JSONDecodeError, AttributeError):
            return None
        if isinstance(target, list) and len(target) == 2:
            return float(target[0]), float(target[1])
    return None


def cmd_plot(args) -> int:
    try:
        cols = read_table_csv(args.input, _PLOT_COLUMNS[args.kind])
    except OSError as exc:
        raise InvalidInput(f"cannot read {args.input}: {exc.strerror}") from None
    if args.kind == "trajectory":
        svg = svgplot.trajectory_svg(cols, _target_for(args))
    elif args.kind == "est_error":
        svg = svgplot.est_error_svg(cols)
    elif args.kind == "range":
        svg = svgplot.range_svg(cols)
    else:
        svg = svgplot.sweep_svg(cols)
    with open(args.out, "w", newline="\n") as fh:
        fh.write(svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bearing-search",
        description="Bearing-only target search with a Dubins vehicle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one episode and write its trace")
    p.add_argument("--config", required=True, help="INI or JSON run configuration")
    p.add_argument("--seed", type=int, default=None, help="override noise.seed")
    p.add_argument("--out", required=True, help="trace CSV (summary goes next to it as .json)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="mean search time over a range of beta values")
    p.add_argument("--config", required=True)
    p.add_argument("--beta", required=True, help="start:stop:step, stop inclusive")
    p.add_argument("--runs", type=int, required=True, help="seeds 0..runs-1 per beta")
    p.add_argument("--workers", type=int, default=1, help="parallel processes")
    p.add_argument("--out", required=True, help="sweep table CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render a trace or sweep CSV as SVG")
    p.add_argument("input", help="CSV written by simulate or sweep")
    p.add_argument("--kind", required=True, choices=sorted(_PLOT_COLUMNS))
    p.add_argument("--out", required=True, help="SVG path")
    p.add_argument("--target", default=None,
                   help="true target x,y for trajectory plots (default: read from the summary JSON)")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; keep --help at 0
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ControllerFault as exc:
        print(f"controller fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


__all__ = ["main", "build_parser", "parse_beta_range", "TRACE_COLUMNS", "SWEEP_COLUMNS"]
