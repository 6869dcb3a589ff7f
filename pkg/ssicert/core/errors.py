"""
Exception hierarchy for ssicert.

Every error carries an ``exit_code`` so the CLI can map failures onto the
documented process exit status without a lookup table:

    2  parse / usage problems
    3  solver failures
    4  infeasible or unstable input
"""

from typing import Optional


class SsiCertError(Exception):
    """Base class for all ssicert errors."""

    exit_code = 1


# --- parse / usage (exit 2) -------------------------------------------------

class ParseError(SsiCertError):
    """Raised when a time-series or model file cannot be parsed."""

    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(f"{message}{where}")


class DimensionMismatch(SsiCertError, ValueError):
    """Raised when matrix dimensions are inconsistent."""

    exit_code = 2


class ConfigError(SsiCertError, ValueError):
    """Raised when a setting cannot be resolved to a valid value."""

    exit_code = 2


# --- solver failures (exit 3) -----------------------------------------------

class SolverFailure(SsiCertError):
    """Raised when a numerical solver fails to converge."""

    exit_code = 3


class NumericalFailure(SolverFailure):
    """SDP backend returned without a usable primal solution."""


class PostRepairDareFailure(SolverFailure):
    """The Riccati equation failed on a model that repair declared valid."""


# --- infeasible / unstable input (exit 4) -----------------------------------

class InfeasibleInput(SsiCertError):
    """Base for errors caused by the data or model rather than the solver."""

    exit_code = 4


class UnstableMatrix(InfeasibleInput):
    """Raised when a matrix required to be Schur stable is not."""


class NonSymmetricInput(InfeasibleInput, ValueError):
    """Raised when a matrix required to be symmetric is not."""


class DareInfeasible(InfeasibleInput):
    """The covariance model is not positive real; the Riccati equation has no valid solution."""


class SingularQ(InfeasibleInput):
    """The innovations covariance is numerically singular."""


class InsufficientData(InfeasibleInput, ValueError):
    """Too few samples for the requested lag or Hankel depth."""


class InsufficientLags(InfeasibleInput, ValueError):
    """Too few covariance lags for the requested Hankel depth."""


class RankDeficient(InfeasibleInput):
    """The retained singular values are zero or not separated."""


class IllConditionedShift(InfeasibleInput):
    """The shifted observability block is too ill-conditioned for least squares."""


class SingularJ1(InfeasibleInput):
    """The closed-loop Lyapunov operator of the Riccati linearization is singular."""


class InfeasibleAtAnyGamma(InfeasibleInput):
    """The robust bounded-real program is infeasible for every gain level."""


class SdpInfeasible(InfeasibleInput):
    """The semidefinite program is primal infeasible."""
