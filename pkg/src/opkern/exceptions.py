"""Exception hierarchy shared by all opkern modules."""


class OpkernError(Exception):
    """Base class for all library errors."""


class ShapeMismatchError(OpkernError):
    """Operands live on different grids or have incompatible dimensions."""


class ValidationError(OpkernError):
    """An input violates a structural precondition (symmetry, unitarity, ...)."""


class KernelConsistencyError(ValidationError):
    """Functional applications of kernel sections disagree beyond tolerance."""


class AlignmentError(ValidationError):
    """Sample indices do not line up with the frame's index set."""


class RieszConditionError(ValidationError):
    """The periodized generator spectrum is not bounded away from zero."""


class ConditioningError(OpkernError):
    """A linear solve was refused because the matrix is numerically singular
    or indefinite. Carries the offending extreme eigenvalues when known."""

    def __init__(self, message, min_eig=None, max_eig=None):
        super().__init__(message)
        self.min_eig = min_eig
        self.max_eig = max_eig


class IndependenceError(ConditioningError):
    """A supplied basis is numerically linearly dependent."""


class DegenerateFrameError(ConditioningError):
    """All singular values of a section Gram fell below the cutoff."""


class DomainError(OpkernError):
    """A point, support set or interval escapes the admissible domain."""


class AdmissibilityError(DomainError):
    """A perturbation radius violates the quarter-spacing admissibility bound."""
