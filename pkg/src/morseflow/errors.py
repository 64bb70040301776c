"""Exception types raised by the pipeline.

Each mathematical failure mode has its own class so the command line front
end can map it to a stable exit code.
"""


class MorseflowError(Exception):
    """Base class for all errors raised by morseflow."""

    exit_code = 1


class ExprSyntaxError(MorseflowError, ValueError):
    """Malformed expression source; ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DegenerateCriticalPoint(MorseflowError):
    """A converged critical point has a (numerically) singular Hessian."""

    exit_code = 2

    def __init__(self, message, location=None, min_abs_eigenvalue=None):
        super().__init__(message)
        self.location = location
        self.min_abs_eigenvalue = min_abs_eigenvalue


class R1NotFound(MorseflowError):
    """No radius on the search grid bounds the preimage of the unit ball."""

    exit_code = 3


class IsolationViolation(MorseflowError):
    """A candidate ball failed the a-posteriori isolation check."""

    exit_code = 4

    def __init__(self, message, trajectory=None, report=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.report = report


class BoundarySquareNonzero(MorseflowError):
    """The assembled Morse boundary operator does not square to zero."""

    exit_code = 5

    def __init__(self, message, chain=None):
        super().__init__(message)
        self.chain = chain


class UnresolvedOrbit(MorseflowError):
    """Orbit shooting hit a trajectory whose limit could not be classified."""

    exit_code = 6


class NonTransverseSuspicion(MorseflowError):
    """Too many shooting samples land on one critical point (not Morse-Smale)."""

    exit_code = 7
