"""Principal component pursuit by the inexact augmented Lagrangian method.

Solves  min ||X||_* + w ||S||_1  subject to  Y = X + S
with alternating proximal steps on the augmented Lagrangian

    ||X||_* + w||S||_1 + <D, Y - X - S> + (mu/2) ||Y - X - S||_F^2

and a geometrically growing penalty mu.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ebrpca.domain.exceptions import ErrorCode, raise_rpca_error
from ebrpca.domain.models import Decomposition, RpcaProblem, validate
from ebrpca.shared.logging_facade import get_logger

_log = get_logger("pcp_solver")

# mu never exceeds mu_init * _MU_CAP_FACTOR
_MU_CAP_FACTOR = 1e7


@dataclass(frozen=True)
class PcpOptions:
    """ALM settings; `None` entries are derived from the data.

    sparsity_weight defaults to 1/sqrt(max(m, n)) and mu_init to
    1.25 / ||Y||_2.
    """

    sparsity_weight: Optional[float] = None
    mu_init: Optional[float] = None
    mu_growth: float = 1.5
    primal_tolerance: float = 1e-7
    max_iterations: int = 1000

    def __post_init__(self) -> None:
        for name in ("sparsity_weight", "mu_init"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise_rpca_error(ErrorCode.INVALID_OPTIONS, message=f"{name} must be positive", value=value)
        if not (math.isfinite(self.mu_growth) and self.mu_growth > 1):
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="mu_growth must be > 1", value=self.mu_growth)
        if not self.primal_tolerance > 0:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="primal_tolerance must be positive",
                             value=self.primal_tolerance)
        if int(self.max_iterations) < 1:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="max_iterations must be >= 1",
                             value=self.max_iterations)

    def weight_for(self, shape) -> float:
        if self.sparsity_weight is not None:
            return float(self.sparsity_weight)
        return 1.0 / math.sqrt(max(shape))


def soft_threshold(m: np.ndarray, tau: float) -> np.ndarray:
    """Elementwise sign(m) * max(|m| - tau, 0), the prox of tau*||.||_1."""
    if tau < 0:
        raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="threshold must be >= 0", value=tau)
    m = np.asarray(m, dtype=np.float64)
    return np.sign(m) * np.maximum(np.abs(m) - tau, 0.0)


def _svd(m: np.ndarray):
    try:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        _log.debug("gesdd did not converge, retrying with gesvd")
    try:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd", check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise_rpca_error(ErrorCode.SVD_FAILURE, message=str(exc), value=m.shape)


def svt(m: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding, the prox of tau*||.||_*."""
    if tau < 0:
        raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="threshold must be >= 0", value=tau)
    m = np.asarray(m, dtype=np.float64)
    u, sv, vt = _svd(m)
    sv = np.maximum(sv - tau, 0.0)
    keep = int(np.count_nonzero(sv))
    return (u[:, :keep] * sv[:keep]) @ vt[:keep]


def pcp_objective(x: np.ndarray, s: np.ndarray, weight: float) -> float:
    """||X||_* + w ||S||_1."""
    return float(np.sum(scipy.linalg.svdvals(x, check_finite=False)) + weight * np.sum(np.abs(s)))


def solve_pcp(problem: RpcaProblem, options: Optional[PcpOptions] = None) -> Decomposition:
    """Equality-constrained PCP on `problem.y` (lam is ignored: E = 0).

    Returns the iterate with the smallest feasibility residual; `converged`
    is False when max_iterations ran out first.
    """
    options = options or PcpOptions()
    validate(problem)
    y = problem.y
    weight = options.weight_for(y.shape)
    y_fro = float(np.linalg.norm(y))
    if y_fro == 0.0:
        zeros = np.zeros(y.shape)
        return Decomposition(x_hat=zeros, s_hat=zeros.copy(), iterations=0, cost_trace=(0.0,),
                             converged=True, mode="PCP", residual_trace=(0.0,))

    y_spec = float(scipy.linalg.svdvals(y, check_finite=False)[0])
    dual = y / max(y_spec, float(np.max(np.abs(y))) / weight)
    mu = options.mu_init if options.mu_init is not None else 1.25 / y_spec
    mu_cap = mu * _MU_CAP_FACTOR

    x = np.zeros(y.shape)
    s = np.zeros(y.shape)
    best = (math.inf, x, s)
    costs = []
    residuals = []
    converged = False
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        s = soft_threshold(y - x + dual / mu, weight / mu)
        x = svt(y - s + dual / mu, 1.0 / mu)
        gap = y - x - s
        dual = dual + mu * gap
        mu = min(mu * options.mu_growth, mu_cap)

        residual = float(np.linalg.norm(gap)) / y_fro
        residuals.append(residual)
        costs.append(pcp_objective(x, s, weight))
        if residual < best[0]:
            best = (residual, x, s)
        _log.debug("PCP iteration %d: residual %.3e objective %.10g", iterations, residual, costs[-1])
        if residual < options.primal_tolerance:
            converged = True
            break

    if not converged:
        _log.warning("PCP: %s after %d iterations (best residual %.3e)",
                     ErrorCode.MAX_ITERATIONS_REACHED.name, iterations, best[0])
    _, x, s = best
    _log.info("PCP solve %dx%d finished: iterations=%d converged=%s residual=%.3e", problem.m, problem.n,
              iterations, converged, best[0])
    return Decomposition(
        x_hat=x,
        s_hat=s,
        iterations=iterations,
        cost_trace=tuple(costs),
        converged=converged,
        mode="PCP",
        residual_trace=tuple(residuals),
    )


__all__ = ["PcpOptions", "soft_threshold", "svt", "pcp_objective", "solve_pcp"]
