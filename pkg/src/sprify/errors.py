"""Exception hierarchy shared by all modules."""


class SprifyError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(SprifyError, ValueError):
    """Non-finite entries, malformed matrices or misuse of a kernel."""


class DimensionError(SprifyError, ValueError):
    """Matrix shapes are inconsistent."""


class IrregularPencilError(SprifyError):
    """det(sE - A) vanishes identically (numerically)."""


class SingularMatrixError(SprifyError):
    """A matrix required to be invertible is numerically singular."""


class PoleError(SprifyError):
    """A transfer function was evaluated at (or numerically near) a pole."""


class IllPosedFeedbackError(SprifyError):
    """I - KD is numerically singular, so the feedback loop is not well posed."""


class InfeasibleError(SprifyError):
    """The requested construction does not exist for this input."""


class InfeasibleSynthesisError(InfeasibleError):
    """No static output feedback renders the system stable and SPR."""


class IndexTooHighError(InfeasibleSynthesisError):
    """The zero output dynamics have index above two."""


class NumericalFailureError(SprifyError):
    """A numerical safeguard was exhausted."""


class InternalConsistencyError(SprifyError):
    """Two independent computations of the same quantity disagree."""
