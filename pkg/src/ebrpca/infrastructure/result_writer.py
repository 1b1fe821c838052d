"""Result files of an experiment run.

- trials.csv: one TrialResult per line (fixed header, `.6g` numbers)
- summary.csv / summary.json: one SummaryRow per (solver, grid point)
- figure.csv: long-format plot data (x, x_label, solver, mean_angle,
  mean_mse, success_rate)
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, fields
from typing import Any, Iterable, List, Sequence

from ebrpca.domain.exceptions import ErrorCode, raise_rpca_error
from ebrpca.domain.experiments import (
    TRIALS_HEADER,
    ExperimentKind,
    GridPoint,
    OutputPaths,
    SummaryRow,
    TrialResult,
    figure_x,
)
from ebrpca.shared.logging_facade import get_logger

FIGURE_HEADER = ("x", "x_label", "solver", "mean_angle", "mean_mse", "success_rate")

_log = get_logger("result_writer")


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([format_value(v) for v in row])
    except OSError as exc:
        raise_rpca_error(ErrorCode.IO_ERROR, message=str(exc), location=path)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def figure_rows(summary: Sequence[SummaryRow], kind: ExperimentKind) -> List[tuple]:
    rows = []
    for s in summary:
        x, label = figure_x(ExperimentKind(kind), GridPoint(s.m, s.n, s.rank, s.rho))
        rows.append((x, label, s.solver, s.angle_mean, s.mse_mean, s.success_rate))
    return sorted(rows, key=lambda r: (r[2], r[0]))


def write_trials_csv(path: str, results: Sequence[TrialResult]) -> None:
    _write_csv(path, TRIALS_HEADER, ([getattr(r, k) for k in TRIALS_HEADER] for r in results))


def write_summary_csv(path: str, summary: Sequence[SummaryRow]) -> None:
    cols = SummaryRow.columns()
    _write_csv(path, cols, ([getattr(s, c) for c in cols] for s in summary))


def write_summary_json(path: str, summary: Sequence[SummaryRow], experiment: str = "") -> None:
    doc = {
        "experiment": experiment,
        "rows": [{k: _json_safe(v) for k, v in asdict(s).items()} for s in summary],
    }
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise_rpca_error(ErrorCode.IO_ERROR, message=str(exc), location=path)


def emit(results: Sequence[TrialResult], summary: Sequence[SummaryRow], paths: OutputPaths,
         kind: ExperimentKind = ExperimentKind.CUSTOM) -> List[str]:
    """Write all result files and return their paths."""
    experiment = results[0].experiment if results else (summary[0].experiment if summary else "")
    write_trials_csv(paths.trials_csv, results)
    write_summary_csv(paths.summary_csv, summary)
    write_summary_json(paths.summary_json, summary, experiment)
    _write_csv(paths.figure_csv, FIGURE_HEADER, figure_rows(summary, kind))
    written = [paths.trials_csv, paths.summary_csv, paths.summary_json, paths.figure_csv]
    _log.info("wrote %s", ", ".join(written))
    return written


_TRIAL_TYPES = {f.name: f.type for f in fields(TrialResult)}


def _parse_cell(name: str, text: str) -> Any:
    kind = _TRIAL_TYPES[name]
    if kind in ("int", int):
        return int(text)
    if kind in ("float", float):
        return float(text)
    return text


def read_trials_csv(path: str) -> List[TrialResult]:
    """Parse a trials.csv written by `write_trials_csv`."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise_rpca_error(ErrorCode.IO_ERROR, message=str(exc), location=path)
    if not rows or tuple(rows[0]) != TRIALS_HEADER:
        raise_rpca_error(ErrorCode.IO_ERROR, message="unexpected trials.csv header", location=path)
    results = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(TRIALS_HEADER):
            raise_rpca_error(ErrorCode.IO_ERROR, message="wrong number of cells", location=f"{path}:{lineno}")
        try:
            values = {k: _parse_cell(k, v) for k, v in zip(TRIALS_HEADER, row)}
        except ValueError as exc:
            raise_rpca_error(ErrorCode.IO_ERROR, message=str(exc), location=f"{path}:{lineno}")
        results.append(TrialResult(**values))
    return results


__all__ = [
    "FIGURE_HEADER",
    "format_value",
    "figure_rows",
    "write_trials_csv",
    "write_summary_csv",
    "write_summary_json",
    "emit",
    "read_trials_csv",
]
