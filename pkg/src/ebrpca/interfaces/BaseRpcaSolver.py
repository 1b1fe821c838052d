"""Solver interface used by the experiment harness.

Every registered solver takes an `RpcaProblem` and returns a
`Decomposition` with the same orientation as the problem.
"""
from __future__ import annotations

from abc import ABC, abstractmethod

from ebrpca.domain.models import Decomposition, RpcaProblem


class BaseRpcaSolver(ABC):
    """Abstract low-rank plus sparse decomposition algorithm."""

    #: Short name used in result files ("EB", "MAP", "PCP").
    name: str = ""

    @abstractmethod
    def solve(self, problem: RpcaProblem) -> Decomposition:
        """Decompose `problem.y` into X_hat + S_hat.

        Implementations raise `domain.exceptions.ExceptionNode` on invalid
        input or numerical failure; non-convergence is reported through
        `Decomposition.converged`.
        """
        raise NotImplementedError()
