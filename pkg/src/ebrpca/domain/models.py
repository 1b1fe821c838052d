"""Core value types shared by all ebrpca solvers.

Matrices are plain float64 numpy arrays, validated and frozen
(read-only) at construction. Everything else is a frozen dataclass:
`RpcaProblem` (what to decompose), `SolverOptions` (how), `VariationalState`
(the empirical Bayes iterate) and `Decomposition` (the answer).

Solvers assume n >= m (more columns than rows, so per-column systems stay
m x m). `oriented()` transposes a problem that violates this and
`Decomposition.transposed()` flips the answer back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ebrpca.domain.exceptions import ErrorCode, raise_rpca_error

DenseMatrix = npt.NDArray[np.float64]
BoolMatrix = npt.NDArray[np.bool_]

DEFAULT_LAMBDA = 1e-6


def dense_matrix(values: Any, *, name: str = "matrix") -> DenseMatrix:
    """Return a validated, read-only float64 copy of `values`.

    >>> dense_matrix([[1, 2, 3], [4, 5, 6]]).shape
    (2, 3)
    """
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise_rpca_error(ErrorCode.SHAPE_MISMATCH, message=f"{name} must be a non-empty 2-D matrix",
                         value=arr.shape)
    bad = ~np.isfinite(arr)
    if bad.any():
        i, j = (int(k) for k in np.argwhere(bad)[0])
        raise_rpca_error(ErrorCode.NON_FINITE_ENTRY, message=f"{name}[{i}, {j}] = {arr[i, j]}",
                         value=arr[i, j], location=f"{name}[{i}, {j}]")
    arr.setflags(write=False)
    return arr


def _bool_matrix(values: Any, shape: Tuple[int, int]) -> BoolMatrix:
    arr = np.array(values, dtype=bool)
    if arr.shape != shape:
        raise_rpca_error(ErrorCode.SHAPE_MISMATCH, message="mask shape differs from Y",
                         value=(arr.shape, shape))
    arr.setflags(write=False)
    return arr


def matrices_close(a: Any, b: Any, tol: float) -> bool:
    """True iff max|a - b| <= tol * (1 + max|b|); `b` is the reference."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        return False
    if a.size == 0:
        return True
    return float(np.max(np.abs(a - b))) <= tol * (1.0 + float(np.max(np.abs(b))))


@dataclass(frozen=True)
class RpcaProblem:
    """Observation Y = X + S + E with diffuse-noise variance `lam`.

    `known_corruption_mask` (True = corrupted/missing entry) switches the
    empirical Bayes solver into matrix completion.
    """

    y: DenseMatrix
    lam: float = DEFAULT_LAMBDA
    known_corruption_mask: Optional[BoolMatrix] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "y", dense_matrix(self.y, name="Y"))
        if not (isinstance(self.lam, (int, float, np.floating)) and math.isfinite(self.lam) and self.lam > 0):
            raise_rpca_error(ErrorCode.NON_POSITIVE_LAMBDA, value=self.lam)
        object.__setattr__(self, "lam", float(self.lam))
        if self.known_corruption_mask is not None:
            object.__setattr__(self, "known_corruption_mask",
                               _bool_matrix(self.known_corruption_mask, self.y.shape))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.y.shape

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def n(self) -> int:
        return self.y.shape[1]

    def transposed(self) -> "RpcaProblem":
        mask = None if self.known_corruption_mask is None else self.known_corruption_mask.T
        return RpcaProblem(self.y.T, self.lam, mask)


def validate(problem: RpcaProblem) -> bool:
    """Check every RpcaProblem invariant; return True or raise ExceptionNode.

    Problems built through the constructor are already valid; this guards
    objects that were mutated or assembled by other means.
    """
    y = np.asarray(problem.y)
    dense_matrix(y, name="Y")
    lam = problem.lam
    if not (isinstance(lam, (int, float, np.floating)) and math.isfinite(lam) and lam > 0):
        raise_rpca_error(ErrorCode.NON_POSITIVE_LAMBDA, value=lam)
    mask = problem.known_corruption_mask
    if mask is not None and np.shape(mask) != y.shape:
        raise_rpca_error(ErrorCode.SHAPE_MISMATCH, message="mask shape differs from Y",
                         value=(np.shape(mask), y.shape))
    return True


def oriented(problem: RpcaProblem) -> Tuple[RpcaProblem, bool]:
    """Return a problem with n >= m, transposing when needed, plus the flip flag."""
    if problem.m > problem.n:
        return problem.transposed(), True
    return problem, False


class SolverMode(str, Enum):
    EMPIRICAL_BAYES = "EB"
    MAP = "MAP"
    COMPLETION = "COMPLETION"


@dataclass(frozen=True)
class SolverOptions:
    """Stopping rule and execution knobs for the variational solvers.

    `deterministic` fixes the order of column-block reductions so repeated
    solves are bit-identical even when `workers > 1`. `retain_bounds` keeps
    the n per-column U_j matrices in the state (n*m*m floats).
    """

    max_iterations: int = 100
    rel_tolerance: float = 1e-6
    mode: SolverMode = SolverMode.EMPIRICAL_BAYES
    deterministic: bool = True
    workers: int = 1
    retain_bounds: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", SolverMode(self.mode))
        if int(self.max_iterations) < 1:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="max_iterations must be >= 1",
                             value=self.max_iterations)
        if not (self.rel_tolerance >= 0):
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="rel_tolerance must be >= 0",
                             value=self.rel_tolerance)
        if int(self.workers) < 1:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="workers must be >= 1", value=self.workers)


@dataclass(frozen=True)
class VariationalState:
    """Hyperparameters (Psi, Gamma) plus everything derived from them.

    Psi is the m x m low-rank prior covariance; column j of the m x n
    matrix Gamma is the diagonal of Gamma_bar_j. `x_hat`, `s_hat`, the
    bound terms (`u_sum` = sum_j U_j, `v_diag` column j = diag V_j) and
    `cost` = L(Psi, Gamma) are all evaluated at this state's own
    hyperparameters. In completion mode masked Gamma entries hold +inf.
    `u` keeps the n x m x m stack of U_j only when requested.
    """

    psi: DenseMatrix
    gamma: DenseMatrix
    x_hat: Optional[DenseMatrix] = None
    s_hat: Optional[DenseMatrix] = None
    u: Optional[np.ndarray] = None
    u_sum: Optional[DenseMatrix] = None
    v_diag: Optional[DenseMatrix] = None
    cost: float = math.nan
    map_cost: float = math.nan

    def __post_init__(self) -> None:
        psi = np.array(self.psi, dtype=np.float64)
        gamma = np.array(self.gamma, dtype=np.float64)
        if psi.ndim != 2 or psi.shape[0] != psi.shape[1]:
            raise_rpca_error(ErrorCode.INVALID_STATE, message="Psi must be square", value=psi.shape)
        if gamma.ndim != 2 or gamma.shape[0] != psi.shape[0]:
            raise_rpca_error(ErrorCode.INVALID_STATE, message="Gamma must have m rows", value=gamma.shape)
        if not np.all(np.isfinite(psi)):
            raise_rpca_error(ErrorCode.INVALID_STATE, message="Psi has non-finite entries")
        scale = 1.0 + float(np.max(np.abs(psi)))
        if float(np.max(np.abs(psi - psi.T))) > 1e-10 * scale:
            raise_rpca_error(ErrorCode.INVALID_STATE, message="Psi is not symmetric")
        if float(np.linalg.eigvalsh(psi)[0]) < -1e-10 * scale:
            raise_rpca_error(ErrorCode.INVALID_STATE, message="Psi is not positive semi-definite")
        if np.isnan(gamma).any() or (gamma < 0).any() or np.isneginf(gamma).any():
            raise_rpca_error(ErrorCode.INVALID_STATE, message="Gamma entries must be >= 0 (or +inf)")
        for name, arr in (("psi", psi), ("gamma", gamma)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.psi.shape[0]

    @property
    def n(self) -> int:
        return self.gamma.shape[1]

    def with_updates(self, **changes: Any) -> "VariationalState":
        return replace(self, **changes)


@dataclass(frozen=True)
class Decomposition:
    """Final estimate Y ~ X_hat + S_hat plus solver diagnostics."""

    x_hat: DenseMatrix
    s_hat: DenseMatrix
    iterations: int
    cost_trace: Tuple[float, ...] = ()
    converged: bool = False
    mode: str = ""
    residual_trace: Tuple[float, ...] = field(default=())
    flipped: bool = False

    def transposed(self) -> "Decomposition":
        return replace(self, x_hat=self.x_hat.T, s_hat=self.s_hat.T, flipped=not self.flipped)

    @property
    def final_cost(self) -> float:
        return self.cost_trace[-1] if self.cost_trace else math.nan

    def cost_is_monotone(self, tol: float = 1e-8) -> bool:
        """True iff every step satisfies c[k+1] <= c[k] + tol * (1 + |c[k]|)."""
        trace = self.cost_trace
        return all(b <= a + tol * (1.0 + abs(a)) for a, b in zip(trace, trace[1:]))

    def diagnostics(self) -> dict:
        """JSON-serializable solver diagnostics."""
        return {
            "mode": self.mode,
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "final_cost": self.final_cost,
            "cost_trace": [float(c) for c in self.cost_trace],
            "residual_trace": [float(r) for r in self.residual_trace],
            "flipped": bool(self.flipped),
        }


__all__ = [
    "DEFAULT_LAMBDA",
    "DenseMatrix",
    "BoolMatrix",
    "dense_matrix",
    "matrices_close",
    "RpcaProblem",
    "validate",
    "oriented",
    "SolverMode",
    "SolverOptions",
    "VariationalState",
    "Decomposition",
]
