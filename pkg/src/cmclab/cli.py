"""Command line entry points: run, validate, report."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import CmcLabError, ConfigError
from .report import rerender, write_artifacts
from .scenarios import run_scenario


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out) if args.out else Path(cfg.output_dir)
    result = run_scenario(cfg)
    report = write_artifacts(cfg, result, out_dir)
    for check in report.checks:
        status = "PASS" if check["pass"] else "FAIL"
        print(
            f"{status}  {check['name']}: expected {_format_value(check['expected'])}, "
            f"observed {_format_value(check['observed'])}"
        )
    n_pass = sum(c["pass"] for c in report.checks)
    verdict = "pass" if report.passed else "FAIL"
    print(f"{cfg.scenario}: {n_pass}/{len(report.checks)} checks, overall {verdict}")
    print(f"artifacts written to {out_dir}")
    return 0 if report.passed else 1


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"configuration valid: scenario {cfg.scenario}")
    return 0


def _cmd_report(args) -> int:
    written = rerender(args.dir)
    for name in written:
        print(f"rendered {name}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cmclab",
        description="Batch experiments for prescribed-curvature graph sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--out", help="output directory (overrides the config)")
    p_run.set_defaults(fn=_cmd_run)

    p_val = sub.add_parser("validate", help="schema-check a config and exit")
    p_val.add_argument("config", help="path to a JSON experiment config")
    p_val.set_defaults(fn=_cmd_validate)

    p_rep = sub.add_parser("report", help="re-render plots from stored artifacts")
    p_rep.add_argument("dir", help="output directory of a previous run")
    p_rep.set_defaults(fn=_cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CmcLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
