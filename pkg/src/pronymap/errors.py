"""Exception hierarchy shared by the solver layers and the CLI."""


class PronyError(Exception):
    """Base class for all errors raised by pronymap."""


class InputError(PronyError, ValueError):
    """Malformed input: wrong lengths, repeated nodes where distinct are required, bad schema."""


class Unsolvable(PronyError):
    """The measurement vector lies on an unsolvability stratum."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DegenerateLeadingMinor(PronyError):
    """The leading r x r Hankel block is numerically singular."""


class NotIrreducible(PronyError):
    """Numerator and denominator share a root."""


class DegenerateBasis(PronyError):
    """Divided-difference collection is not a basis (node vector not subordinated)."""


class ConditioningError(PronyError):
    """Linear system too ill-conditioned to be solved reliably."""


class DegenerateJacobian(PronyError):
    """Jacobian of the multiplicity-restricted map is singular at an iterate."""


class NoConvergence(PronyError):
    """Newton iteration failed to reach the residual target."""


class UndefinedSeparation(PronyError):
    """Node separation is undefined for a single-node signal."""


class PoleError(PronyError, ZeroDivisionError):
    """Evaluation point coincides with a node."""
