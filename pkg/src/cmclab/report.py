"""Report assembly and artifact output (JSON, CSV fields, SVG plots)."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError
from .field import write_field_csv
from .plots import render_overview
from .scenarios import ScenarioResult


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


@dataclass(frozen=True)
class ExperimentReport:
    """Echoed config plus typed checks; passed means every check passed."""

    config: dict
    checks: list[dict]
    lines: list[dict]
    tables: dict
    timings: dict

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def as_dict(self, include_timings: bool = True) -> dict:
        out = {
            "config": self.config,
            "checks": self.checks,
            "lines": self.lines,
            "tables": self.tables,
            "pass": self.passed,
        }
        if include_timings:
            out["timings"] = self.timings
        return out

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.as_dict(include_timings), sort_keys=True, indent=2)


def build_report(cfg: ExperimentConfig, result: ScenarioResult) -> ExperimentReport:
    tables = dict(result.tables)
    if result.domain_spec is not None:
        tables["domain"] = result.domain_spec
    if result.tau is not None:
        tables["tau"] = result.tau
    return ExperimentReport(
        config=_plain(cfg.echo()),
        checks=[_plain(c.as_dict()) for c in result.checks],
        lines=[_plain(ln.report()) for ln in result.lines],
        tables=_plain(tables),
        timings=_plain(result.timings),
    )


def _sup_w_triples(result: ScenarioResult):
    grid = result.grid
    jj, ii = np.nonzero(grid.nonexterior)
    X, Y = grid.meshes()
    return [
        (float(X[j, i]), float(Y[j, i]), float(result.sup_w[j, i]))
        for j, i in zip(jj, ii)
    ]


def _write_sup_w_csv(result: ScenarioResult, path: Path) -> None:
    grid = result.grid
    jj, ii = np.nonzero(grid.nonexterior)
    X, Y = grid.meshes()
    with path.open("w", newline="") as handle:
        handle.write(f"# origin: {grid.origin.x!r} {grid.origin.y!r}\n")
        handle.write(f"# spacing: {grid.h!r}\n")
        handle.write(f"# dims: {grid.nx} {grid.ny}\n")
        writer = csv.writer(handle)
        writer.writerow(["i", "j", "x", "y", "sup_w"])
        for j, i in zip(jj, ii):
            writer.writerow(
                [int(i), int(j), float(X[j, i]), float(Y[j, i]), float(result.sup_w[j, i])]
            )


def _read_sup_w_csv(path: Path):
    spacing = None
    triples = []
    with path.open() as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# spacing:"):
                    spacing = float(line.split(":", 1)[1])
                continue
            cells = line.split(",")
            if cells[0] == "i":
                continue
            triples.append((float(cells[2]), float(cells[3]), float(cells[4])))
    if spacing is None:
        raise ConfigError(f"{path}: missing spacing metadata")
    return triples, spacing


def _plot_title(report_dict: dict) -> str:
    return f"scenario: {report_dict['config']['scenario']}"


def render_report_plots(report_dict: dict, sup_w_csv: Path | None) -> dict[str, str]:
    triples, spacing = (None, None)
    if sup_w_csv is not None and sup_w_csv.exists():
        triples, spacing = _read_sup_w_csv(sup_w_csv)
    svg = render_overview(
        _plot_title(report_dict),
        report_dict["tables"].get("domain"),
        triples,
        spacing,
        report_dict["tables"].get("tau"),
        report_dict["lines"],
    )
    return {"overview.svg": svg}


def write_artifacts(
    cfg: ExperimentConfig, result: ScenarioResult, out_dir
) -> ExperimentReport:
    out = Path(out_dir)
    (out / "fields").mkdir(parents=True, exist_ok=True)
    (out / "plots").mkdir(parents=True, exist_ok=True)

    report = build_report(cfg, result)
    (out / "report.json").write_text(report.to_json() + "\n")

    if result.final_field is not None:
        write_field_csv(result.final_field, out / "fields" / "u_final.csv")
    sup_w_path = None
    if result.sup_w is not None and result.grid is not None:
        sup_w_path = out / "fields" / "sup_w.csv"
        _write_sup_w_csv(result, sup_w_path)

    for name, svg in render_report_plots(report.as_dict(), sup_w_path).items():
        (out / "plots" / name).write_text(svg)
    return report


def rerender(out_dir) -> list[str]:
    """Rebuild plots from stored artifacts; returns the file names written."""
    out = Path(out_dir)
    report_path = out / "report.json"
    if not report_path.exists():
        raise ConfigError(f"{report_path}: no report found")
    report_dict = json.loads(report_path.read_text())
    sup_w_path = out / "fields" / "sup_w.csv"
    (out / "plots").mkdir(parents=True, exist_ok=True)
    written = []
    plots = render_report_plots(
        report_dict, sup_w_path if sup_w_path.exists() else None
    )
    for name, svg in plots.items():
        (out / "plots" / name).write_text(svg)
        written.append(name)
    return written
