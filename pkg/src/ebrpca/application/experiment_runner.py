"""Experiment runner: generate, solve and score every (grid point, trial).

Each (grid point, trial) pair is one work unit: its instance is generated
once and handed to every configured solver. Units run on a bounded thread
pool; the returned rows are always sorted by (grid point, solver, trial)
so output files do not depend on completion order. A failing solver or
generator marks its rows `failed` and the sweep carries on.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ebrpca.domain.exceptions import ErrorCode, ExceptionNode, raise_rpca_error
from ebrpca.domain.experiments import (
    STATUS_FAILED,
    STATUS_MAXITER,
    STATUS_OK,
    ExperimentKind,
    ExperimentSpec,
    GridPoint,
    SummaryRow,
    TrialResult,
    success_threshold,
    trial_seed,
)
from ebrpca.domain.metrics import score_trial
from ebrpca.domain.models import Decomposition
from ebrpca.domain.synth import PhotoSpec, SynthSpec, gen_photometric, gen_problem
from ebrpca.infrastructure.solvers import build_solver
from ebrpca.interfaces.BaseRpcaSolver import BaseRpcaSolver
from ebrpca.shared.logging_facade import get_logger, print_translated_error
from ebrpca.shared.registry import Registry, registry as shared_registry

THREADS_ENV = "RPCA_THREADS"

_log = get_logger("experiment_runner")


def worker_cap(environ: Optional[Dict[str, str]] = None) -> Optional[int]:
    """Upper bound on workers from RPCA_THREADS (None when unset)."""
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        raise_rpca_error(ErrorCode.CONFIG_ERROR, message="must be a positive integer", value=raw,
                         location=THREADS_ENV)
    return cap


@dataclass(frozen=True)
class _Instance:
    problem: Any
    x_true: np.ndarray
    s_true: np.ndarray
    y_reference: Optional[np.ndarray] = None


def generate_instance(spec: ExperimentSpec, point: GridPoint, seed: int) -> _Instance:
    """Ground-truthed problem for one trial."""
    if spec.kind is ExperimentKind.PHOTOMETRIC:
        photo = PhotoSpec(
            num_lights=point.m,
            num_pixels=point.n,
            corruption_prob=point.rho,
            seed=seed,
            lam=spec.lam,
            specular_scale=float(spec.grid.get("specular_scale", 1.0)),
            shadow_limit=float(spec.grid.get("shadow_limit", 0.1)),
        )
        inst = gen_photometric(photo)
        return _Instance(inst.problem, inst.x_true, inst.s_true, inst.problem.y)
    wide = point.m <= point.n
    synth = SynthSpec(
        m=min(point.m, point.n),
        n=max(point.m, point.n),
        rank=point.rank,
        corruption_prob=point.rho,
        corruption_range=spec.corruption_range,
        seed=seed,
        lam=spec.lam,
    )
    problem, x, s = gen_problem(synth)
    if wide:
        return _Instance(problem, x, s)
    return _Instance(problem.transposed(), x.T, s.T)


class ExperimentRunner:
    """Runs one ExperimentSpec.

    Errors of failed trials are collected in `errors` (dicts with the grid
    point, trial, solver and the localized message).
    """

    def __init__(self, spec: ExperimentSpec, registry: Optional[Registry] = None,
                 environ: Optional[Dict[str, str]] = None) -> None:
        self.spec = spec
        self.registry = registry or shared_registry
        self.errors: List[Dict[str, Any]] = []
        cap = worker_cap(environ)
        self.workers = min(spec.workers, cap) if cap is not None else spec.workers
        self.solvers: List[BaseRpcaSolver] = [self._make_solver(name) for name in spec.solvers]

    def _make_solver(self, name: str) -> BaseRpcaSolver:
        cls = self.registry.get("solver", name)
        if cls is None:
            raise_rpca_error(ErrorCode.CONFIG_ERROR, message=f"solver not registered, known: {self.registry.names('solver')}",
                             value=name, location="solvers")
        return build_solver(cls, self.spec.solver_options, self.spec.pcp_options)

    def _failed_row(self, point: GridPoint, seed: int, solver: str) -> TrialResult:
        nan = math.nan
        return TrialResult(self.spec.name, solver, point.m, point.n, point.rank, point.rho, seed,
                           nan, nan, nan, nan, 0, 0.0, STATUS_FAILED)

    def _record_error(self, exc: Exception, point: GridPoint, trial: int, solver: str) -> None:
        if isinstance(exc, ExceptionNode):
            text = print_translated_error(exc)
        else:
            text = f"{type(exc).__name__}: {exc}"
            _log.error(text)
        _log.error("trial failed: %s trial=%d solver=%s", point.key(), trial, solver)
        self.errors.append({"point": point.key(), "trial": trial, "solver": solver, "message": text})

    def _run_unit(self, unit: Tuple[int, GridPoint, int]) -> List[Tuple[Tuple[int, int, int], TrialResult]]:
        index, point, trial = unit
        seed = trial_seed(self.spec.seed_base, point, trial)
        rows = []
        try:
            inst = generate_instance(self.spec, point, seed)
        except Exception as exc:  # noqa: BLE001
            self._record_error(exc, point, trial, "*")
            return [((index, k, trial), self._failed_row(point, seed, s.name)) for k, s in enumerate(self.solvers)]

        for k, solver in enumerate(self.solvers):
            try:
                start = time.perf_counter()
                result: Decomposition = solver.solve(inst.problem)
                seconds = time.perf_counter() - start if self.spec.output.record_timing else 0.0
                score = score_trial(result, inst.x_true, inst.s_true, inst.y_reference)
            except Exception as exc:  # noqa: BLE001
                self._record_error(exc, point, trial, solver.name)
                rows.append(((index, k, trial), self._failed_row(point, seed, solver.name)))
                continue
            photometric = score.relative_mse is not None
            rows.append(((index, k, trial), TrialResult(
                experiment=self.spec.name,
                solver=solver.name,
                m=point.m,
                n=point.n,
                rank=point.rank,
                rho=point.rho,
                seed=seed,
                mse=score.relative_mse if photometric else score.mse_normalized,
                angle=score.relative_angle if photometric else score.angle_degrees,
                precision=score.support_precision,
                recall=score.support_recall,
                iters=int(result.iterations),
                seconds=seconds,
                status=STATUS_OK if result.converged else STATUS_MAXITER,
            )))
        return rows

    def run(self) -> List[TrialResult]:
        points = self.spec.grid_points()
        units = [(i, p, t) for i, p in enumerate(points) for t in range(self.spec.trials)]
        _log.info("experiment %s: %d grid points x %d trials, solvers %s, %d worker(s)", self.spec.name,
                  len(points), self.spec.trials, ",".join(self.spec.solvers), self.workers)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                batches = list(pool.map(self._run_unit, units))
        else:
            batches = [self._run_unit(u) for u in units]
        keyed = sorted((row for batch in batches for row in batch), key=lambda kr: kr[0])
        results = [row for _, row in keyed]
        for row in aggregate(results, self.spec.kind):
            _log.info("%s %s: angle %.4g (sd %.3g) mse %.4g success %.2f failures %d", row.solver,
                      GridPoint(row.m, row.n, row.rank, row.rho).key(), row.angle_mean, row.angle_std,
                      row.mse_mean, row.success_rate, row.failures)
        return results


def run_experiment(spec: ExperimentSpec, registry: Optional[Registry] = None,
                   environ: Optional[Dict[str, str]] = None) -> List[TrialResult]:
    return ExperimentRunner(spec, registry, environ).run()


def _stats(values: Sequence[float]) -> Tuple[float, float]:
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=np.float64)
    return float(np.mean(arr)), float(np.std(arr))


def aggregate(results: Sequence[TrialResult], kind: ExperimentKind = ExperimentKind.CUSTOM,
              success_angle: Optional[float] = None) -> List[SummaryRow]:
    """Mean and (population) standard deviation per (solver, grid point).

    Rows follow the first appearance of each (grid point, solver) pair. The
    success cut on the angle column defaults to `success_threshold(kind)`.
    """
    if success_angle is None:
        success_angle = success_threshold(kind)
    groups: Dict[Tuple[str, str, GridPoint], List[TrialResult]] = {}
    for r in results:
        groups.setdefault((r.experiment, r.solver, r.point), []).append(r)
    summary = []
    for (experiment, solver, point), rows in groups.items():
        done = [r for r in rows if not r.failed]
        mse = _stats([r.mse for r in done])
        angle = _stats([r.angle for r in done])
        precision = _stats([r.precision for r in done])
        recall = _stats([r.recall for r in done])
        successes = sum(1 for r in done if r.angle < success_angle)
        summary.append(SummaryRow(
            experiment=experiment,
            solver=solver,
            m=point.m,
            n=point.n,
            rank=point.rank,
            rho=point.rho,
            trials=len(rows),
            failures=len(rows) - len(done),
            mse_mean=mse[0],
            mse_std=mse[1],
            angle_mean=angle[0],
            angle_std=angle[1],
            precision_mean=precision[0],
            precision_std=precision[1],
            recall_mean=recall[0],
            recall_std=recall[1],
            iters_mean=_stats([float(r.iters) for r in done])[0],
            seconds_mean=_stats([r.seconds for r in done])[0],
            success_rate=successes / len(rows),
        ))
    return summary


__all__ = ["THREADS_ENV", "worker_cap", "generate_instance", "ExperimentRunner", "run_experiment", "aggregate"]
