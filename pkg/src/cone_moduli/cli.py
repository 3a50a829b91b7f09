"""Command line interface.

    cone-moduli verify    --config cfg.yaml [--out report.json] [--csv report.csv]
                          [--deterministic] [--threads N]
    cone-moduli operators --config cfg.yaml [--out report.json]
    cone-moduli potential --config cfg.yaml --grid re0:re1:n,im0:im1:m --out grid.csv

Exit codes: 0 all checks passed, 1 a numeric check failed, 2 bad
configuration, 3 internal or I/O error. CONE_MODULI_THREADS is the fallback
for --threads.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from cone_moduli.config import load_config
from cone_moduli.errors import ConfigInvalid, ConeModuliError, IoFailure
from cone_moduli.report import emit, report_json
from cone_moduli.runner import exit_code_for, potential_grid, run_verify


def _threads_from(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("CONE_MODULI_THREADS")
    return int(env) if env else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cone-moduli",
        description="Verify the complex hyperbolic vs Weil-Petersson Gram "
                    "equality on flat cone sphere moduli, and property-test "
                    "the singular operator toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML experiment config")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: CONE_MODULI_THREADS or 1)")
    common.add_argument("--deterministic", action="store_true", default=None,
                        help="force the deterministic reduction order")

    p_verify = sub.add_parser("verify", parents=[common],
                              help="run all enabled checks")
    p_verify.add_argument("--out", help="write the JSON report here")
    p_verify.add_argument("--csv", help="write the CSV summary here")

    p_ops = sub.add_parser("operators", parents=[common],
                           help="run the operator property suite only")
    p_ops.add_argument("--out", help="write the JSON report here")

    p_pot = sub.add_parser("potential", parents=[common],
                           help="tabulate the area potential over a grid")
    p_pot.add_argument("--grid", required=True,
                       help="re_min:re_max:n_re,im_min:im_max:n_im")
    p_pot.add_argument("--out", required=True, help="CSV output path")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        config.threads = _threads_from(args)
        if args.deterministic is not None:
            config.deterministic = True

        if args.command == "potential":
            rows = potential_grid(config, args.grid)
            try:
                with open(args.out, "w", newline="") as fh:
                    writer = csv.DictWriter(
                        fh, fieldnames=["u2_re", "u2_im", "area", "err", "status"])
                    writer.writeheader()
                    writer.writerows(rows)
            except OSError as exc:
                raise IoFailure(f"cannot write {args.out}: {exc}") from exc
            print(f"wrote {len(rows)} grid rows to {args.out}")
            return 0

        if args.command == "operators":
            config.checks = {name: name in ("operators", "asymptotics")
                             and config.checks.get(name, name == "operators")
                             for name in config.checks}
            if not any(config.checks.values()):
                config.checks["operators"] = True

        report = run_verify(config)
        if getattr(args, "out", None):
            emit(report, "json", args.out)
            print(f"wrote JSON report to {args.out}")
        if getattr(args, "csv", None):
            emit(report, "csv", args.csv)
            print(f"wrote CSV report to {args.csv}")
        if not getattr(args, "out", None):
            print(report_json(report))
        summary = report["summary"]
        for name, ok in summary["checks"].items():
            state = "skipped" if ok is None else ("pass" if ok else "FAIL")
            print(f"check {name}: {state}", file=sys.stderr)
        return exit_code_for(report)

    except ConfigInvalid as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except IoFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except ConeModuliError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
