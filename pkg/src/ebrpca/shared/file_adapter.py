"""
File adapter utilities.

Matrices are stored as plain CSV: one matrix row per line, decimal floats,
no header. An optional JSON sidecar next to the CSV (same stem, `.json`)
records the shape and free-form provenance.

Functions
- get_a_file(path, encoding='utf-8') -> list[str]
- read_matrix_csv(path) -> DenseMatrix
- write_matrix_csv(path, matrix, provenance=None) -> pathlib.Path
- read_sidecar(path) -> dict | None
"""
from __future__ import annotations

import json
import pathlib
from typing import Any, List, Mapping, Optional, Union

import numpy as np

from ebrpca.domain.exceptions import ErrorCode, ExceptionNode, raise_rpca_error
from ebrpca.domain.models import DenseMatrix, dense_matrix

PathLike = Union[str, pathlib.Path]


def get_a_file(name: PathLike, encoding: str = "utf-8") -> List[str]:
    """Read a text file and return its lines without trailing newlines."""
    path = pathlib.Path(name)
    try:
        with path.open("r", encoding=encoding) as f:
            return [line.rstrip("\n\r") for line in f]
    except OSError as exc:
        raise_rpca_error(ErrorCode.IO_ERROR, message=str(exc), location=path)


def sidecar_path(path: PathLike) -> pathlib.Path:
    return pathlib.Path(path).with_suffix(".json")


def read_matrix_csv(path: PathLike) -> DenseMatrix:
    """Parse a headerless CSV matrix with `np.loadtxt`; blank lines are ignored.

    Ragged rows raise ShapeMismatch, unparsable or non-finite cells raise
    NonFiniteEntry.
    """
    numbered = [(lineno, line) for lineno, line in enumerate(get_a_file(path), start=1) if line.strip()]
    if not numbered:
        raise_rpca_error(ErrorCode.SHAPE_MISMATCH, message="empty matrix file", location=path)
    width = numbered[0][1].count(",")
    for lineno, line in numbered:
        if line.count(",") != width:
            raise_rpca_error(ErrorCode.SHAPE_MISMATCH, message="ragged row",
                             value=(line.count(",") + 1, width + 1), location=f"{path}:{lineno}")
    try:
        rows = np.loadtxt([line for _, line in numbered], delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise_rpca_error(ErrorCode.NON_FINITE_ENTRY, message=str(exc), location=str(path))
    try:
        return dense_matrix(rows, name=pathlib.Path(path).name)
    except ExceptionNode as exc:
        exc.location = f"{path}: {exc.location}" if exc.location else str(path)
        raise


def read_sidecar(path: PathLike) -> Optional[dict]:
    """Return the JSON sidecar of a matrix file, or None if there is none."""
    side = sidecar_path(path)
    if not side.exists():
        return None
    try:
        return json.loads(side.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise_rpca_error(ErrorCode.IO_ERROR, message=str(exc), location=side)


def write_matrix_csv(path: PathLike, matrix: Any, provenance: Optional[Mapping[str, Any]] = None) -> pathlib.Path:
    """Write `matrix` with round-trip precision (17 significant digits).

    A sidecar is written only when `provenance` is given.
    """
    arr = dense_matrix(matrix)
    path = pathlib.Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as f:
            np.savetxt(f, arr, fmt="%.17g", delimiter=",")
        if provenance is not None:
            manifest = {"rows": int(arr.shape[0]), "cols": int(arr.shape[1]), "provenance": dict(provenance)}
            sidecar_path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    except OSError as exc:
        raise_rpca_error(ErrorCode.IO_ERROR, message=str(exc), location=path)
    return path


__all__ = ["get_a_file", "sidecar_path", "read_matrix_csv", "read_sidecar", "write_matrix_csv"]
