"""Concrete solver adapters: EB, MAP and PCP behind `BaseRpcaSolver`.

Adapters handle orientation (the solvers need n >= m) so callers can pass
problems of any shape.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

from ebrpca.domain import eb_solver, pcp_solver
from ebrpca.domain.models import Decomposition, RpcaProblem, SolverMode, SolverOptions, oriented
from ebrpca.domain.pcp_solver import PcpOptions
from ebrpca.interfaces.BaseRpcaSolver import BaseRpcaSolver


def _solve_oriented(problem: RpcaProblem, run) -> Decomposition:
    work, flipped = oriented(problem)
    result = run(work)
    return result.transposed() if flipped else result


class EmpiricalBayesSolver(BaseRpcaSolver):
    """Variational empirical Bayes; switches to completion when the
    problem carries a known-corruption mask."""

    name = "EB"

    def __init__(self, options: Optional[SolverOptions] = None):
        self.options = replace(options or SolverOptions(), mode=SolverMode.EMPIRICAL_BAYES)

    def solve(self, problem: RpcaProblem) -> Decomposition:
        if problem.known_corruption_mask is not None:
            return _solve_oriented(problem, lambda p: eb_solver.solve_completion(p, self.options))
        return _solve_oriented(problem, lambda p: eb_solver.solve(p, self.options))


class MapSolver(BaseRpcaSolver):
    name = "MAP"

    def __init__(self, options: Optional[SolverOptions] = None):
        self.options = replace(options or SolverOptions(), mode=SolverMode.MAP)

    def solve(self, problem: RpcaProblem) -> Decomposition:
        return _solve_oriented(problem, lambda p: eb_solver.solve(p, self.options))


class PcpSolver(BaseRpcaSolver):
    name = "PCP"

    def __init__(self, options: Optional[PcpOptions] = None):
        self.options = options or PcpOptions()

    def solve(self, problem: RpcaProblem) -> Decomposition:
        return _solve_oriented(problem, lambda p: pcp_solver.solve_pcp(p, self.options))


def build_solver(cls, solver_options: SolverOptions, pcp_options: PcpOptions) -> BaseRpcaSolver:
    """Instantiate a registered adapter class with the options it takes."""
    if issubclass(cls, PcpSolver):
        return cls(pcp_options)
    return cls(solver_options)


def register(registry) -> None:
    """Register the built-in solvers under their short names."""
    for cls in (EmpiricalBayesSolver, MapSolver, PcpSolver):
        registry.register("solver", cls.name, cls)


__all__ = ["EmpiricalBayesSolver", "MapSolver", "PcpSolver", "build_solver", "register"]
