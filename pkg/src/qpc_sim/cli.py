"""Command-line front end.

Single-run mode writes one experiment report; adding ``--axis``/``--values``
turns the same invocation into a sweep. Exit codes: 0 success, 2 bad
configuration, 3 I/O failure. When ``--seed`` is omitted the environment
variable QPC_SIM_SEED is used, then 0.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Sequence

from .adversary import ATTACK_IDS
from .harness import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    SweepCell,
    run_experiment,
    sweep,
)
from .qudit import ParameterError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpc-sim",
        description="Monte-Carlo simulator for d-level single-particle private-comparison protocols.",
    )
    parser.add_argument("--variant", required=True, choices=["two-tp", "one-tp"])
    parser.add_argument("--n", type=int, required=True, help="number of comparing parties")
    parser.add_argument("--d", type=int, required=True, help="qudit dimension")
    parser.add_argument("--r", type=int, required=True, help="secrets lie in [0, r)")
    parser.add_argument("--l", type=int, default=8, help="decoys per transmission (default 8)")
    parser.add_argument(
        "--secrets",
        default="random",
        help="comma-separated secrets (fixed across trials), or 'random' to redraw per trial",
    )
    parser.add_argument(
        "--c",
        dest="shared_key",
        default="random",
        help="one-tp shared key: an integer, or 'random' to redraw per trial",
    )
    parser.add_argument("--attack", default="none", choices=list(ATTACK_IDS))
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=None, help="master seed (fallback: QPC_SIM_SEED, then 0)")
    parser.add_argument("--threshold", type=float, default=0.0, help="tolerated decoy error rate (default 0)")
    parser.add_argument("--out", default=None, help="output path (default: print to stdout)")
    parser.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")
    parser.add_argument("--axis", choices=["d", "l", "attack"], default=None, help="sweep this parameter")
    parser.add_argument("--values", default=None, help="comma-separated values for --axis")
    return parser


def _parse_secrets(text: str) -> tuple[int, ...] | str:
    if text.strip().lower() == "random":
        return "random"
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"--secrets expects comma-separated integers or 'random', got {text!r}") from None


def _parse_shared_key(text: str) -> int | str:
    if text.strip().lower() == "random":
        return "random"
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"--c expects an integer or 'random', got {text!r}") from None


def _resolve_seed(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("QPC_SIM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"QPC_SIM_SEED must be an integer, got {env!r}") from None


def _parse_axis_values(axis: str, text: str | None) -> list:
    if text is None:
        raise ConfigError("--axis requires --values")
    parts = [part.strip() for part in text.split(",") if part.strip() != ""]
    if axis == "attack":
        return parts
    try:
        return [int(part) for part in parts]
    except ValueError:
        raise ConfigError(f"--values for axis {axis!r} expects integers, got {text!r}") from None


def _csv_text(rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buffer.getvalue()


def _render_report(report: ExperimentReport, fmt: str) -> str:
    if fmt == "csv":
        return _csv_text([report.csv_row()])
    return report.to_json()


def _render_sweep(cells: list[SweepCell], fmt: str) -> str:
    if fmt == "csv":
        return _csv_text([cell.csv_row() for cell in cells])
    return json.dumps([cell.to_dict() for cell in cells], indent=2)


def _summary(report: ExperimentReport) -> str:
    analytic = "n/a" if report.analytic_abort is None else f"{report.analytic_abort:.6g}"
    return (
        f"trials={report.n_trials} completed={report.n_completed} aborted={report.n_aborted} "
        f"correct={report.n_correct} abort_rate={report.abort_rate:.6g} analytic={analytic}"
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message; code 2 on bad flags
        return int(exc.code or 0)
    try:
        config = ExperimentConfig(
            variant=args.variant,
            n=args.n,
            d=args.d,
            r=args.r,
            l=args.l,
            secrets=_parse_secrets(args.secrets),
            shared_key=_parse_shared_key(args.shared_key),
            attack=args.attack,
            trials=args.trials,
            seed=_resolve_seed(args.seed),
            threshold=args.threshold,
        )
        config.validate()
        if args.axis is not None:
            cells = sweep(config, args.axis, _parse_axis_values(args.axis, args.values))
            text = _render_sweep(cells, args.fmt)
            done = sum(1 for c in cells if c.report is not None)
            summary = f"sweep over {args.axis}: {done}/{len(cells)} cells run"
        else:
            if args.values is not None:
                raise ConfigError("--values requires --axis")
            report = run_experiment(config)
            text = _render_report(report, args.fmt)
            summary = _summary(report)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.out is None:
        print(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8") as handle:
                handle.write(text)
                if not text.endswith("\n"):
                    handle.write("\n")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"{summary} -> {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
