"""Exception taxonomy shared by all modules.

Everything numerical derives from NumericalError so the CLI can map any
mid-run breakdown to a single exit code.
"""


class NumericalError(Exception):
    """Base class for numerical failures (singular steps, failed solves...)."""


class DomainError(NumericalError):
    """Input lies outside the mathematical domain of a formula or leg function."""


class SingularStep(NumericalError):
    """A denominator in a map recurrence fell below the singularity guard."""


class BranchNotFound(NumericalError):
    """Periodic fixed-point iteration did not converge to the small-h branch."""


class SolveFailed(NumericalError):
    """Newton iteration for an implicit map did not converge."""


class NonInvertibleLeg(NumericalError):
    """A scalar leg equation has no admissible real solution."""


class SingularMatrix(NumericalError):
    """Matrix inversion required by a construction is not possible."""


class FactorizationOutsideDomain(NumericalError):
    """A pivot of the unpivoted LU factorization vanished."""


class ShapeViolation(NumericalError):
    """A conjugated Lax matrix left its expected band structure."""


class DegenerateFace(NumericalError):
    """A quad equation is not solvable for the requested vertex."""


class BranchMismatch(NumericalError):
    """Two superposition formulas disagree (input data off the solution set)."""
