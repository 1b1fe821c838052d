"""Empirical Bayes variational RPCA solver.

Minimizes the marginal-likelihood cost

    L(Psi, Gamma) = sum_j [ y_j' Sigma_j^-1 y_j + log|Sigma_j| ],
    Sigma_j = Psi + diag(Gamma[:, j]) + lam * I,

by majorization-minimization: given (Psi, Gamma) the posterior means
(x_j, s_j) and the log-det bound terms (U_j, V_j) have closed forms, and
given those the next (Psi, Gamma) has a closed form. Every iteration leaves
L unchanged or lowers it.

Two special cases share the same loop:

* MAP: U_j = V_j = 0, which turns the iteration into the majorization-
  minimization scheme for the log-det / log-penalty MAP objective.
* Completion: entries with a known corruption have gamma = +inf, i.e.
  they are dropped from the Gaussian model of their column. Each column is
  then solved on its unmasked rows only and the masked entries of S_hat take
  the residual y - x_hat.

Per-column systems are independent; they are evaluated in stacked blocks of
columns, each column factored with a Cholesky decomposition and solved
through `cho_solve` (no explicit inverses); blocks may run on a thread pool.
Each iteration costs O(m^3 n).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from ebrpca.domain.exceptions import ErrorCode, raise_rpca_error
from ebrpca.domain.models import (
    Decomposition,
    DenseMatrix,
    RpcaProblem,
    SolverMode,
    SolverOptions,
    VariationalState,
    validate,
)
from ebrpca.shared.logging_facade import get_logger

# kappa floor; Psi and Gamma start positive even for Y = 0.
INIT_FLOOR = 1e-12

# Floats per stacked (columns x m x m) work array.
_BLOCK_BUDGET = 1 << 21

_TINY = np.finfo(np.float64).tiny

_log = get_logger("eb_solver")


@dataclass(frozen=True)
class EbIterationReport:
    iteration: int
    cost_before: float
    cost_after: float
    x_change: float
    s_change: float

    @property
    def relative_change(self) -> float:
        return abs(self.cost_before - self.cost_after) / (1.0 + abs(self.cost_before))

    @property
    def descended(self) -> bool:
        return self.cost_after <= self.cost_before + 1e-8 * (1.0 + abs(self.cost_before))


@dataclass
class _Block:
    start: int
    stop: int
    x: np.ndarray
    s: np.ndarray
    u: Optional[np.ndarray]
    v: Optional[np.ndarray]
    quad: float
    logdet: float


@dataclass
class _Sweep:
    x_hat: np.ndarray
    s_hat: np.ndarray
    u_sum: Optional[np.ndarray]
    u: Optional[np.ndarray]
    v_diag: Optional[np.ndarray]
    quad: float
    logdet: float

    @property
    def cost(self) -> float:
        return self.quad + self.logdet


def _solve_block(psi: np.ndarray, gamma: np.ndarray, y: np.ndarray, lam: float,
                 start: int, stop: int, bounds: bool) -> _Block:
    m = psi.shape[0]
    k = stop - start
    g = gamma[:, start:stop].T
    yb = y[:, start:stop].T
    finite = np.isfinite(g)
    g0 = np.where(finite, g, 0.0)
    base = psi + lam * np.eye(m)

    # Rows with gamma = inf leave the column model; their entries of z and of
    # Sigma^-1 Psi stay zero.
    z = np.zeros((k, m))
    logdet = np.zeros(k)
    gain_t = np.zeros((k, m, m)) if bounds else None
    w_diag = np.zeros((k, m)) if bounds else None
    for j in range(k):
        rows = np.flatnonzero(finite[j])
        if rows.size == 0:
            raise_rpca_error(ErrorCode.MASK_ALL_ONES, value=start + j, location=f"column {start + j}")
        sub = np.ix_(rows, rows)
        sigma = base[sub] + np.diag(g0[j, rows])
        rhs = yb[j, rows][:, None]
        if bounds:
            rhs = np.hstack([rhs, psi[rows], base[sub]])
        try:
            factor = scipy.linalg.cho_factor(sigma, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError:
            raise_rpca_error(ErrorCode.NUMERICAL_DEGENERACY, value=lam, location=f"column {start + j}")
        sol = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
        logdet[j] = 2.0 * np.log(np.diag(factor[0])).sum()
        z[j, rows] = sol[:, 0]
        if bounds:
            gain_t[j, rows] = sol[:, 1:m + 1]
            w_diag[j, rows] = np.diag(sol[:, m + 1:])

    quad = np.einsum("ki,ki->k", z, yb)
    x = z @ psi
    s = np.where(finite, g0 * z, yb - x)

    u = v = None
    if bounds:
        # U_j = Psi - Psi Sigma^-1 Psi in Joseph form (PSD in floating point):
        # (I - K) Psi (I - K)' + K D K',  K = Psi Sigma^-1,  D = Gamma_j + lam I
        gain = np.swapaxes(gain_t, 1, 2)
        resid = np.eye(m) - gain
        noise = np.where(finite, g0 + lam, 0.0)
        u = resid @ psi @ np.swapaxes(resid, 1, 2)
        u = u + (gain * noise[:, None, :]) @ gain_t
        u = 0.5 * (u + np.swapaxes(u, 1, 2))
        # V_j = Gamma_j - Gamma_j Sigma^-1 Gamma_j = Gamma_j Sigma^-1 (Psi + lam I)
        v = np.where(finite, np.maximum(g0 * w_diag, 0.0), np.einsum("kii->ki", u) + lam)
    return _Block(start, stop, x, s, u, v, float(quad.sum()), float(logdet.sum()))


def _sweep(psi: np.ndarray, gamma: np.ndarray, problem: RpcaProblem, *, bounds: bool,
           retain: bool = False, workers: int = 1, deterministic: bool = True) -> _Sweep:
    """Evaluate every per-column quantity at (psi, gamma)."""
    if not problem.lam > 0:
        raise_rpca_error(ErrorCode.SINGULAR_SYSTEM, value=problem.lam)
    y = problem.y
    m, n = y.shape
    width = max(1, _BLOCK_BUDGET // (m * m))
    spans = [(a, min(a + width, n)) for a in range(0, n, width)]

    def run(span: Tuple[int, int]) -> _Block:
        return _solve_block(psi, gamma, y, problem.lam, span[0], span[1], bounds)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            if deterministic:
                blocks: List[_Block] = list(pool.map(run, spans))
            else:
                futures = [pool.submit(run, span) for span in spans]
                blocks = [f.result() for f in as_completed(futures)]
    else:
        blocks = [run(span) for span in spans]

    x_hat = np.empty((m, n))
    s_hat = np.empty((m, n))
    v_diag = np.empty((m, n)) if bounds else None
    u_stack = np.empty((n, m, m)) if bounds and retain else None
    u_sum = np.zeros((m, m)) if bounds else None
    quad = 0.0
    logdet = 0.0
    for blk in blocks:
        x_hat[:, blk.start:blk.stop] = blk.x.T
        s_hat[:, blk.start:blk.stop] = blk.s.T
        quad += blk.quad
        logdet += blk.logdet
        if bounds:
            v_diag[:, blk.start:blk.stop] = blk.v.T
            u_sum += blk.u.sum(axis=0)
            if u_stack is not None:
                u_stack[blk.start:blk.stop] = blk.u
    return _Sweep(x_hat, s_hat, u_sum, u_stack, v_diag, quad, logdet)


def _log_det_psd(psi: np.ndarray) -> float:
    eig = np.linalg.eigvalsh(0.5 * (psi + psi.T))
    return float(np.log(np.maximum(eig, _TINY)).sum())


def _map_cost_from(sweep: _Sweep, psi: np.ndarray, gamma: np.ndarray, n: int) -> float:
    return sweep.quad + float(np.log(np.maximum(gamma, _TINY)).sum()) + n * _log_det_psd(psi)


def _completion_mask(problem: RpcaProblem, mode: SolverMode) -> Optional[np.ndarray]:
    if mode is not SolverMode.COMPLETION:
        return None
    mask = problem.known_corruption_mask
    if mask is None:
        raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="completion mode needs a known-corruption mask",
                         value=mode.value)
    full = np.flatnonzero(mask.all(axis=0))
    if full.size:
        raise_rpca_error(ErrorCode.MASK_ALL_ONES, value=int(full[0]), location=f"column {int(full[0])}")
    return mask


def _evaluate(psi: np.ndarray, gamma: np.ndarray, problem: RpcaProblem, options: SolverOptions) -> VariationalState:
    is_map = options.mode is SolverMode.MAP
    sweep = _sweep(psi, gamma, problem, bounds=not is_map, retain=options.retain_bounds,
                   workers=options.workers, deterministic=options.deterministic)
    m, n = problem.shape
    if is_map:
        u_sum = np.zeros((m, m))
        v_diag = np.zeros((m, n))
        u = np.zeros((n, m, m)) if options.retain_bounds else None
        map_cost = _map_cost_from(sweep, psi, gamma, n)
    else:
        u_sum, v_diag, u = sweep.u_sum, sweep.v_diag, sweep.u
        map_cost = math.nan
    return VariationalState(
        psi=psi, gamma=gamma, x_hat=sweep.x_hat, s_hat=sweep.s_hat,
        u=u, u_sum=u_sum, v_diag=v_diag, cost=sweep.cost, map_cost=map_cost,
    )


def _objective(state: VariationalState, mode: SolverMode) -> float:
    return state.map_cost if mode is SolverMode.MAP else state.cost


def initialize(problem: RpcaProblem, options: Optional[SolverOptions] = None) -> VariationalState:
    """Start from Psi = kappa I and Gamma = kappa, kappa = ||Y||_F^2 / (nm).

    In completion mode the masked Gamma entries start (and stay) at +inf.
    """
    options = options or SolverOptions()
    validate(problem)
    m, n = problem.shape
    if m > n:
        raise_rpca_error(ErrorCode.SHAPE_MISMATCH, message="solver needs n >= m; transpose the problem first",
                         value=problem.shape)
    mask = _completion_mask(problem, options.mode)
    kappa = float(np.sum(np.square(problem.y))) / (n * m)
    if kappa <= 0.0:
        kappa = INIT_FLOOR
    psi = kappa * np.eye(m)
    gamma = np.full((m, n), kappa)
    if mask is not None:
        gamma[mask] = np.inf
    return _evaluate(psi, gamma, problem, options)


def update_means(state: VariationalState, problem: RpcaProblem) -> Tuple[DenseMatrix, DenseMatrix]:
    """Posterior means x_j = Psi Sigma_j^-1 y_j and s_j = Gamma_j Sigma_j^-1 y_j."""
    sweep = _sweep(state.psi, state.gamma, problem, bounds=False)
    return sweep.x_hat, sweep.s_hat


def update_uv(state: VariationalState, problem: RpcaProblem,
              mode: SolverMode = SolverMode.EMPIRICAL_BAYES) -> Tuple[np.ndarray, DenseMatrix]:
    """Return the n x m x m stack of U_j and the m x n matrix of diag(V_j).

    U_j = Psi - Psi Sigma_j^-1 Psi and V_j = Gamma_j - Gamma_j Sigma_j^-1 Gamma_j
    are the gradients of log|A_j| w.r.t. Psi^-1 and Gamma_j^-1; both are zero
    in MAP mode.
    """
    m, n = problem.shape
    if SolverMode(mode) is SolverMode.MAP:
        return np.zeros((n, m, m)), np.zeros((m, n))
    sweep = _sweep(state.psi, state.gamma, problem, bounds=True, retain=True)
    return sweep.u, sweep.v_diag


def update_hyperparams(state: VariationalState,
                       mode: SolverMode = SolverMode.EMPIRICAL_BAYES) -> Tuple[DenseMatrix, DenseMatrix]:
    """Closed-form (Psi, Gamma) given the current means and bound terms.

    EB:  Psi = (1/n) sum_j (x_j x_j' + U_j),  gamma_ij = s_ij^2 + [V_j]_ii
    MAP: Psi = X X' / n,                      gamma_ij = s_ij^2
    Masked (+inf) Gamma entries are kept.
    """
    mode = SolverMode(mode)
    if state.x_hat is None or state.s_hat is None:
        raise_rpca_error(ErrorCode.INVALID_STATE, message="state carries no posterior means")
    x = np.asarray(state.x_hat)
    s = np.asarray(state.s_hat)
    n = x.shape[1]
    if mode is SolverMode.MAP:
        psi = (x @ x.T) / n
        gamma = np.square(s)
    else:
        if state.u_sum is not None:
            u_sum = np.asarray(state.u_sum)
        elif state.u is not None:
            u_sum = np.asarray(state.u).sum(axis=0)
        else:
            raise_rpca_error(ErrorCode.INVALID_STATE, message="state carries no U bound terms")
        if state.v_diag is None:
            raise_rpca_error(ErrorCode.INVALID_STATE, message="state carries no V bound terms")
        psi = (x @ x.T + u_sum) / n
        gamma = np.square(s) + np.asarray(state.v_diag)
    psi = 0.5 * (psi + psi.T)
    gamma = np.where(np.isposinf(state.gamma), np.inf, gamma)
    return psi, gamma


def compute_cost(psi: np.ndarray, gamma: np.ndarray, problem: RpcaProblem) -> float:
    """L(Psi, Gamma); +inf Gamma entries drop out of their column's model."""
    return _sweep(np.asarray(psi, dtype=np.float64), np.asarray(gamma, dtype=np.float64),
                  problem, bounds=False).cost


def map_cost(psi: np.ndarray, gamma: np.ndarray, problem: RpcaProblem) -> float:
    """sum_j y_j' Sigma_j^-1 y_j + sum_ij log gamma_ij + n log|Psi|.

    This is the MAP objective after minimizing over X and S; logs of exact
    zeros are floored at the smallest positive double.
    """
    psi = np.asarray(psi, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    sweep = _sweep(psi, gamma, problem, bounds=False)
    return _map_cost_from(sweep, psi, gamma, problem.n)


def map_objective(x: np.ndarray, s: np.ndarray, psi: np.ndarray, gamma: np.ndarray, problem: RpcaProblem) -> float:
    """Expanded MAP objective evaluated directly (Psi PD, Gamma > 0).

    (1/lam)||Y - X - S||^2 + sum(s^2/gamma + log gamma) + Tr[X X' Psi^-1] + n log|Psi|
    """
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    psi = np.asarray(psi, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(gamma <= 0):
        raise_rpca_error(ErrorCode.NUMERICAL_DEGENERACY, message="gamma must be positive")
    try:
        chol = np.linalg.cholesky(psi)
    except np.linalg.LinAlgError:
        raise_rpca_error(ErrorCode.NUMERICAL_DEGENERACY, message="Psi must be positive definite")
    w = scipy.linalg.solve_triangular(chol, x, lower=True, check_finite=False)
    residual = problem.y - x - s
    return float(
        np.sum(np.square(residual)) / problem.lam
        + np.sum(np.square(s) / gamma + np.log(gamma))
        + np.sum(np.square(w))
        + x.shape[1] * 2.0 * np.log(np.diag(chol)).sum()
    )


def iterate_once(state: VariationalState, problem: RpcaProblem,
                 options: Optional[SolverOptions] = None,
                 iteration: int = 0) -> Tuple[VariationalState, EbIterationReport]:
    """One majorization-minimization step.

    The incoming state already carries the means and U/V terms evaluated at
    its (Psi, Gamma); the step updates the hyperparameters from them and
    re-evaluates means, bound terms and cost at the new hyperparameters.
    """
    options = options or SolverOptions()
    psi, gamma = update_hyperparams(state, options.mode)
    new = _evaluate(psi, gamma, problem, options)
    report = EbIterationReport(
        iteration=iteration,
        cost_before=_objective(state, options.mode),
        cost_after=_objective(new, options.mode),
        x_change=_relative_change(new.x_hat, state.x_hat),
        s_change=_relative_change(new.s_hat, state.s_hat),
    )
    return new, report


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.max(np.abs(new - old)) / (1.0 + np.max(np.abs(old))))


def solve(problem: RpcaProblem, options: Optional[SolverOptions] = None) -> Decomposition:
    """Run the variational algorithm to convergence (or max_iterations).

    Returns the posterior means at the final hyperparameters.
    """
    options = options or SolverOptions()
    state = initialize(problem, options)
    trace = [_objective(state, options.mode)]
    converged = False
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        state, report = iterate_once(state, problem, options, iterations)
        trace.append(report.cost_after)
        _log.debug("%s iteration %d: cost %.10g -> %.10g (rel %.3g)", options.mode.value, iterations,
                   report.cost_before, report.cost_after, report.relative_change)
        if report.relative_change < options.rel_tolerance:
            converged = True
            break
    if not converged:
        _log.warning("%s: %s after %d iterations (last cost %.10g)", options.mode.value,
                     ErrorCode.MAX_ITERATIONS_REACHED.name, iterations, trace[-1])
    _log.info("%s solve %dx%d finished: iterations=%d converged=%s cost=%.10g", options.mode.value,
              problem.m, problem.n, iterations, converged, trace[-1])
    return Decomposition(
        x_hat=state.x_hat,
        s_hat=state.s_hat,
        iterations=iterations,
        cost_trace=tuple(float(c) for c in trace),
        converged=converged,
        mode=options.mode.value,
    )


def solve_completion(problem: RpcaProblem, options: Optional[SolverOptions] = None) -> Decomposition:
    """Solve with the known-corruption mask pinned at gamma = +inf."""
    options = options or SolverOptions()
    if options.mode is not SolverMode.COMPLETION:
        options = SolverOptions(
            max_iterations=options.max_iterations,
            rel_tolerance=options.rel_tolerance,
            mode=SolverMode.COMPLETION,
            deterministic=options.deterministic,
            workers=options.workers,
            retain_bounds=options.retain_bounds,
        )
    return solve(problem, options)


__all__ = [
    "INIT_FLOOR",
    "EbIterationReport",
    "initialize",
    "update_means",
    "update_uv",
    "update_hyperparams",
    "compute_cost",
    "map_cost",
    "map_objective",
    "iterate_once",
    "solve",
    "solve_completion",
]
