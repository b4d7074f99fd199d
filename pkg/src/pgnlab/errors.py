"""Exception types shared across the package."""


class PgnError(Exception):
    """Base class for all package errors."""


class OutOfDomain(PgnError):
    pass


class DomainMismatch(PgnError):
    pass


class GapOrOverlap(PgnError):
    pass


class DiscontinuousJoin(PgnError):
    pass


class InvalidParams(PgnError):
    pass


class InvalidTau(PgnError):
    pass


class ConstraintInfeasible(PgnError):
    """A table constructor could not satisfy its constraint set; the message
    names the failing constraint and the (k, i) cell."""


class GrowthViolation(PgnError):
    pass


class InsufficientData(PgnError):
    pass


class DimensionMismatch(PgnError):
    pass


class GradeOverflow(PgnError):
    pass


class ZeroInput(PgnError):
    pass


class DependentBasis(PgnError):
    pass


class BudgetExceeded(PgnError):
    pass


class ExhaustedWithoutWitness(PgnError):
    """The Dirichlet search ran out of candidates.  Existence is guaranteed,
    so this always signals an implementation bug."""
