"""
Semidefinite programming backend.

Every LMI in the package (stability projection, positive-real feasibility,
repair, bounded-real and robust bounded-real programs) is built as a cvxpy
problem and handed to :func:`solve_sdp`, which walks the configured solver
chain and reports a normalized status. Swapping the backend means changing
this module only.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import cvxpy as cp
import numpy as np

from ssicert.core.errors import NumericalFailure, SdpInfeasible
from ssicert.utils.config import load_settings

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"

# Accepted primal violation for an OPTIMAL_INACCURATE status.
_INACCURATE_VIOLATION = 1e-6


@dataclass
class SdpProblem:
    """
    A conic program: objective, constraints and the named variables to read back.

    Constraints are cvxpy constraints, typically built with :func:`psd`, so strict
    inequalities arrive here already shifted by their slack.
    """

    objective: Union[cp.Minimize, cp.Maximize]
    constraints: List[cp.Constraint]
    variables: Dict[str, Union[cp.Variable, cp.Expression]] = field(default_factory=dict)
    name: str = "sdp"
    _compiled: Optional[cp.Problem] = field(default=None, init=False, repr=False)

    def as_cvxpy(self) -> cp.Problem:
        """The cvxpy problem, built once so parameterized re-solves reuse it."""
        if self._compiled is None:
            self._compiled = cp.Problem(self.objective, self.constraints)
        return self._compiled


@dataclass
class SdpResult:
    """Normalized outcome of :func:`solve_sdp`."""

    status: str
    values: Dict[str, np.ndarray]
    objective: Optional[float]
    max_violation: float
    solver: Optional[str] = None
    iterations: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    def require(self, name: str = "sdp") -> "SdpResult":
        """Return self when optimal, otherwise raise the matching error."""
        if self.status == INFEASIBLE:
            raise SdpInfeasible(f"{name}: problem is infeasible")
        if self.status != OPTIMAL:
            raise NumericalFailure(
                f"{name}: no usable solution (solver={self.solver}, "
                f"max violation={self.max_violation:.2e})"
            )
        return self


def psd(expr, margin: float = 0.0) -> cp.Constraint:
    """
    Constrain the symmetric part of a square affine expression: sym(expr) ⪰ margin·I.

    A positive ``margin`` realizes a strict inequality ``expr ≻ 0``.
    """
    size = expr.shape[0]
    sym = (expr + expr.T) / 2
    if margin:
        return sym >> margin * np.eye(size)
    return sym >> 0


def _max_violation(constraints: Sequence[cp.Constraint]) -> float:
    worst = 0.0
    for constraint in constraints:
        try:
            violation = np.asarray(constraint.violation(), dtype=float)
        except (TypeError, ValueError):
            return float("inf")
        if violation.size:
            worst = max(worst, float(np.max(np.abs(violation))))
    return worst


def _available(solvers: Sequence[str]) -> List[str]:
    installed = set(cp.installed_solvers())
    chain = [name for name in solvers if name in installed]
    if not chain:
        logger.warning("none of %s is installed; using the cvxpy default", list(solvers))
        chain = [None]
    return chain


def solve_sdp(prob: SdpProblem, solvers: Optional[Sequence[str]] = None) -> SdpResult:
    """
    Solve a semidefinite program with the configured solver chain.

    Args:
        prob: Problem to solve.
        solvers: Override for the solver chain (defaults to settings).

    Returns:
        SdpResult with status 'optimal', 'infeasible' or 'numerical_failure'.
    """
    chain = _available(solvers or load_settings().solver_chain)
    problem = prob.as_cvxpy()

    last_status = None
    last_solver = None
    saw_infeasible = False
    for solver in chain:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                problem.solve(solver=solver, verbose=False)
        except (cp.SolverError, ValueError, ArithmeticError) as exc:
            logger.warning("%s: solver %s failed (%s), trying next", prob.name, solver, exc)
            continue

        last_status, last_solver = problem.status, solver
        stats = problem.solver_stats
        iterations = getattr(stats, "num_iters", None) if stats is not None else None

        if problem.status == cp.INFEASIBLE:
            logger.debug("%s: infeasible (%s)", prob.name, solver)
            return SdpResult(INFEASIBLE, {}, None, float("inf"), solver, iterations)
        if problem.status == cp.INFEASIBLE_INACCURATE:
            saw_infeasible = True
            continue

        if problem.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            violation = _max_violation(prob.constraints)
            if problem.status == cp.OPTIMAL_INACCURATE and violation > _INACCURATE_VIOLATION:
                logger.warning("%s: inaccurate solution from %s (violation %.2e), trying next",
                               prob.name, solver, violation)
                continue
            values = {
                key: np.array(var.value, dtype=float)
                for key, var in prob.variables.items()
                if var.value is not None
            }
            logger.debug("%s: %s via %s, objective=%.6g, violation=%.2e",
                         prob.name, problem.status, solver, problem.value, violation)
            return SdpResult(OPTIMAL, values, float(problem.value), violation, solver, iterations)

    if saw_infeasible:
        return SdpResult(INFEASIBLE, {}, None, float("inf"), last_solver)
    logger.warning("%s: all solvers failed (last status %s)", prob.name, last_status)
    return SdpResult(NUMERICAL_FAILURE, {}, None, float("inf"), last_solver)
