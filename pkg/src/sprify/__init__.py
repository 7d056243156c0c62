"""Stable-and-SPR static output feedback for descriptor systems.

Decide whether ``u = K y``, ``z = L y`` can make a descriptor system
``E x' = A x + B u, y = C x + D u`` stable and strictly positive real,
compute such gains, and certify the closed loop numerically.
"""

from .descriptor import (
    AugmentedPencil,
    ClosedLoopSystem,
    DescriptorSystem,
    augmented_pencil,
    close_loop,
    eval_G,
    eval_G_inverse,
    pencil_eigenvalues,
    pencil_index,
    rank_conditions,
    validate,
)
from .errors import (
    DimensionError,
    IllPosedFeedbackError,
    IndexTooHighError,
    InfeasibleError,
    InfeasibleSynthesisError,
    InternalConsistencyError,
    InvalidInputError,
    IrregularPencilError,
    NumericalFailureError,
    PoleError,
    SingularMatrixError,
    SprifyError,
)
from .frequency import FrequencyReport, frequency_sprifiability, infinity_pole_order
from .spectral import SpectralReport, nonalgebraic_shortcuts, spectral_sprifiability
from .synthesis import ControllerGains, GinvDecomposition, decompose_ginv, synthesize
from .verify import (
    FrequencyGrid,
    SprCertificate,
    default_grid,
    spr_check,
    spr_structural_checks,
    verify_closed_loop,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentedPencil",
    "ClosedLoopSystem",
    "ControllerGains",
    "DescriptorSystem",
    "FrequencyGrid",
    "FrequencyReport",
    "GinvDecomposition",
    "SpectralReport",
    "SprCertificate",
    "augmented_pencil",
    "close_loop",
    "decompose_ginv",
    "default_grid",
    "eval_G",
    "eval_G_inverse",
    "frequency_sprifiability",
    "infinity_pole_order",
    "nonalgebraic_shortcuts",
    "pencil_eigenvalues",
    "pencil_index",
    "rank_conditions",
    "spectral_sprifiability",
    "spr_check",
    "spr_structural_checks",
    "synthesize",
    "validate",
    "verify_closed_loop",
    "DimensionError",
    "IllPosedFeedbackError",
    "IndexTooHighError",
    "InfeasibleError",
    "InfeasibleSynthesisError",
    "InternalConsistencyError",
    "InvalidInputError",
    "IrregularPencilError",
    "NumericalFailureError",
    "PoleError",
    "SingularMatrixError",
    "SprifyError",
]
