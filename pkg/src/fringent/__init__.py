"""Fringe visibility and entanglement of light emitted by pinned atoms."""

from ._accel import backend_name
from .errors import (
    ConvergenceError,
    DomainError,
    EnvelopeError,
    FringentError,
    IllPosedError,
    InfeasibleReconstructionError,
    InsufficientDataError,
    InternalConsistencyError,
    InvalidStateError,
    SingularSchemeError,
)
from .states import TwoQubitBlochState, WLikeState, W_STATE, canonicalize, density_matrix

__version__ = "0.1.0"
