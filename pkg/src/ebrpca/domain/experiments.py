"""Experiment descriptions for the benchmark harness.

An `ExperimentSpec` names a kind of sweep, a grid section that expands into
`GridPoint`s, the solvers to compare and how often to repeat each point.
Specs come from JSON presets (`config/experiments.json`) or user files of
the same shape; CLI flags override individual fields.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from ebrpca.domain.exceptions import ErrorCode, ExceptionNode, raise_rpca_error
from ebrpca.domain.metrics import SUCCESS_ANGLE_DEGREES
from ebrpca.domain.models import DEFAULT_LAMBDA, SolverOptions
from ebrpca.domain.pcp_solver import PcpOptions

KNOWN_SOLVERS = ("EB", "MAP", "PCP")

TRIALS_HEADER = (
    "experiment", "solver", "m", "n", "rank", "rho", "seed",
    "mse", "angle", "precision", "recall", "iters", "seconds", "status",
)

STATUS_OK = "ok"
STATUS_MAXITER = "maxiter"
STATUS_FAILED = "failed"

PHOTOMETRIC_RANK = 3

# Photometric rows hold angles relative to the angle of Y itself.
RELATIVE_SUCCESS = 1.0


class ExperimentKind(str, Enum):
    RANK_SWEEP = "rank_sweep"
    RHO_SWEEP = "rho_sweep"
    SQUARE_TABLE = "square_table"
    PHOTOMETRIC = "photometric"
    CUSTOM = "custom"


@dataclass(frozen=True, order=True)
class GridPoint:
    m: int
    n: int
    rank: int
    rho: float

    def key(self) -> str:
        return f"m={self.m},n={self.n},rank={self.rank},rho={self.rho!r}"


@dataclass(frozen=True)
class OutputPaths:
    out_dir: str = "results"
    record_timing: bool = True

    @property
    def trials_csv(self) -> str:
        return os.path.join(self.out_dir, "trials.csv")

    @property
    def summary_csv(self) -> str:
        return os.path.join(self.out_dir, "summary.csv")

    @property
    def summary_json(self) -> str:
        return os.path.join(self.out_dir, "summary.json")

    @property
    def figure_csv(self) -> str:
        return os.path.join(self.out_dir, "figure.csv")


@dataclass(frozen=True)
class TrialResult:
    """One row of trials.csv: one solver on one (grid point, trial)."""

    experiment: str
    solver: str
    m: int
    n: int
    rank: int
    rho: float
    seed: int
    mse: float
    angle: float
    precision: float
    recall: float
    iters: int
    seconds: float
    status: str

    @property
    def point(self) -> GridPoint:
        return GridPoint(self.m, self.n, self.rank, self.rho)

    @property
    def failed(self) -> bool:
        return self.status == STATUS_FAILED


@dataclass(frozen=True)
class SummaryRow:
    """Trial statistics for one (solver, grid point); failed trials are
    excluded from the means but count against the success rate."""

    experiment: str
    solver: str
    m: int
    n: int
    rank: int
    rho: float
    trials: int
    failures: int
    mse_mean: float
    mse_std: float
    angle_mean: float
    angle_std: float
    precision_mean: float
    precision_std: float
    recall_mean: float
    recall_std: float
    iters_mean: float
    seconds_mean: float
    success_rate: float

    @classmethod
    def columns(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    kind: ExperimentKind
    grid: Mapping[str, Any] = field(default_factory=dict)
    trials: int = 10
    solvers: Tuple[str, ...] = ("EB", "PCP")
    solver_options: SolverOptions = field(default_factory=SolverOptions)
    pcp_options: PcpOptions = field(default_factory=PcpOptions)
    output: OutputPaths = field(default_factory=OutputPaths)
    seed_base: int = 0
    lam: float = DEFAULT_LAMBDA
    corruption_range: float = 10.0
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _enum(ExperimentKind, self.kind, "kind"))
        solvers = ordered_solvers([str(s).upper() for s in self.solvers])
        if not solvers:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message="no solvers selected", location="solvers")
        unknown = [s for s in solvers if s not in KNOWN_SOLVERS]
        if unknown:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message=f"unknown solver(s), choose from {KNOWN_SOLVERS}",
                             value=",".join(unknown), location="solvers")
        object.__setattr__(self, "solvers", solvers)
        if int(self.trials) < 1:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message="trials must be >= 1", value=self.trials,
                             location="trials")
        if int(self.workers) < 1:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message="workers must be >= 1", value=self.workers,
                             location="workers")
        if int(self.seed_base) < 0:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message="seed must be >= 0", value=self.seed_base,
                             location="seed_base")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message="lambda must be positive", value=self.lam,
                             location="lambda")
        self.grid_points()

    def grid_points(self) -> List[GridPoint]:
        """Expand the grid section, in config order."""
        g = self.grid
        try:
            if self.kind is ExperimentKind.RANK_SWEEP:
                points = [GridPoint(int(g["m"]), int(g["n"]), int(r), float(g["rho"])) for r in g["ranks"]]
            elif self.kind is ExperimentKind.RHO_SWEEP:
                points = [GridPoint(int(g["m"]), int(g["n"]), int(g["rank"]), float(p)) for p in g["rhos"]]
            elif self.kind is ExperimentKind.SQUARE_TABLE:
                ratio = float(g["rank_ratio"])
                points = [GridPoint(int(s), int(s), max(1, int(round(ratio * int(s)))), float(g["rho"]))
                          for s in g["sizes"]]
            elif self.kind is ExperimentKind.PHOTOMETRIC:
                lights = g["lights"] if isinstance(g["lights"], (list, tuple)) else [g["lights"]]
                points = [GridPoint(int(m), int(g["pixels"]), PHOTOMETRIC_RANK, float(g["rho"])) for m in lights]
            else:
                points = [GridPoint(int(p["m"]), int(p["n"]), int(p["rank"]), float(p["rho"])) for p in g["points"]]
        except KeyError as exc:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message=f"grid section lacks {exc}",
                             location=f"{self.name}.grid")
        except (TypeError, ValueError) as exc:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message=str(exc), location=f"{self.name}.grid")
        if not points:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message="grid is empty", location=f"{self.name}.grid")
        for p in points:
            if not (1 <= p.rank <= min(p.m, p.n)) or not 0.0 <= p.rho <= 1.0:
                raise_rpca_error(ErrorCode.CONFIG_ERROR, message="grid point out of range", value=p.key(),
                                 location=f"{self.name}.grid")
            if self.kind is ExperimentKind.PHOTOMETRIC and p.m < 3:
                raise_rpca_error(ErrorCode.CONFIG_ERROR, message="photometric sweeps need >= 3 lights",
                                 value=p.m, location=f"{self.name}.grid")
        return points

    def with_overrides(self, **changes: Any) -> "ExperimentSpec":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def figure_x(kind: ExperimentKind, point: GridPoint) -> Tuple[float, str]:
    """Abscissa of a grid point in the long-format plot data."""
    if kind is ExperimentKind.RANK_SWEEP:
        return point.rank / point.m, "rank_ratio"
    if kind is ExperimentKind.RHO_SWEEP:
        return point.rho, "rho"
    return float(point.m), "m"


def success_threshold(kind: ExperimentKind) -> float:
    """A trial succeeds when its `angle` column is below this value."""
    return RELATIVE_SUCCESS if ExperimentKind(kind) is ExperimentKind.PHOTOMETRIC else SUCCESS_ANGLE_DEGREES


def trial_seed(seed_base: int, point: GridPoint, trial: int) -> int:
    """Seed of one trial; adding grid points never changes existing seeds."""
    digest = hashlib.blake2b(f"{int(seed_base)}|{point.key()}|{int(trial)}".encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "big") >> 1


def _enum(cls, value: Any, location: str):
    try:
        return cls(value)
    except ValueError:
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message=f"choose from {[e.value for e in cls]}",
                         value=value, location=location)


def _section(data: Mapping[str, Any], key: str, name: str) -> Dict[str, Any]:
    section = data.get(key, {}) or {}
    if not isinstance(section, Mapping):
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message="expected an object", location=f"{name}.{key}")
    return dict(section)


def spec_from_dict(name: str, data: Mapping[str, Any]) -> ExperimentSpec:
    """Build an ExperimentSpec from one config entry."""
    if not isinstance(data, Mapping):
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message="experiment entry must be an object", location=name)
    try:
        solver_opts = SolverOptions(**_section(data, "solver_options", name))
        pcp_opts = PcpOptions(**_section(data, "pcp_options", name))
        output = _section(data, "output", name)
        return ExperimentSpec(
            name=name,
            kind=data.get("kind", ExperimentKind.CUSTOM.value),
            grid=_section(data, "grid", name),
            trials=int(data.get("trials", 10)),
            solvers=tuple(data.get("solvers", ("EB", "PCP"))),
            solver_options=solver_opts,
            pcp_options=pcp_opts,
            output=OutputPaths(out_dir=str(output.get("out_dir", os.path.join("results", name))),
                               record_timing=bool(output.get("record_timing", True))),
            seed_base=int(data.get("seed_base", 0)),
            lam=float(data.get("lambda", DEFAULT_LAMBDA)),
            corruption_range=float(data.get("corruption_range", 10.0)),
            workers=int(data.get("workers", 1)),
        )
    except ExceptionNode as exc:
        if exc.code == ErrorCode.CONFIG_ERROR:
            raise
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message=str(exc), value=exc.value, location=name)
    except (TypeError, ValueError) as exc:
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message=str(exc), location=name)


def default_config_path() -> str:
    package_config_path = os.path.join(os.path.dirname(__file__), "..", "config", "experiments.json")
    legacy_config_path = os.path.join(os.path.dirname(__file__), "..", "..", "..", "config", "experiments.json")
    return package_config_path if os.path.exists(package_config_path) else legacy_config_path


def load_presets(path: Optional[str] = None) -> Dict[str, Dict[str, Any]]:
    """Read a JSON object of named experiment entries."""
    path = path or default_config_path()
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message=str(exc), location=path)
    except ValueError as exc:
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message=f"invalid JSON: {exc}", location=path)
    if not isinstance(data, dict):
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message="top level must be an object", location=path)
    return {k: v for k, v in data.items() if isinstance(v, dict)}


def get_preset(name: str, path: Optional[str] = None) -> ExperimentSpec:
    """Build the named entry; an entry of the form {"alias": "<other>"} resolves to that entry."""
    presets = load_presets(path)
    if name not in presets:
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message=f"unknown experiment, known: {sorted(presets)}",
                         value=name, location=path or "presets")
    entry = presets[name]
    if "alias" in entry:
        target = entry["alias"]
        if len(entry) != 1 or not isinstance(target, str) or target not in presets or "alias" in presets[target]:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message="alias must name a plain experiment entry",
                             value=target, location=name)
        entry = presets[target]
    return spec_from_dict(name, entry)


def parse_solver_list(text: str) -> Tuple[str, ...]:
    return tuple(s.strip().upper() for s in text.split(",") if s.strip())


def ordered_solvers(solvers: Sequence[str]) -> Tuple[str, ...]:
    """Deduplicate, keeping the configured order."""
    return tuple(dict.fromkeys(solvers))


__all__ = [
    "KNOWN_SOLVERS",
    "TRIALS_HEADER",
    "STATUS_OK",
    "STATUS_MAXITER",
    "STATUS_FAILED",
    "ExperimentKind",
    "GridPoint",
    "OutputPaths",
    "TrialResult",
    "SummaryRow",
    "ExperimentSpec",
    "figure_x",
    "success_threshold",
    "RELATIVE_SUCCESS",
    "trial_seed",
    "spec_from_dict",
    "default_config_path",
    "load_presets",
    "get_preset",
    "parse_solver_list",
    "ordered_solvers",
]
