"""Exception types raised by fringent."""


class FringentError(Exception):
    """Base class for all package errors."""


class InvalidStateError(FringentError, ValueError):
    """An atomic state or density matrix violates its invariants."""


class DomainError(FringentError, ValueError):
    """A numeric argument lies outside the domain of an operation."""


class ConvergenceError(FringentError):
    """An iterative optimizer failed to converge.

    The best value found so far is kept on ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IllPosedError(FringentError):
    """A reconstruction design cannot determine the requested parameters."""


class SingularSchemeError(IllPosedError):
    """The first-order two-atom tomography relations are singular at this point."""


class InfeasibleReconstructionError(FringentError):
    """A fitted reconstruction does not correspond to a physical state."""


class InsufficientDataError(FringentError):
    """Too few photons or bins to form an estimate."""


class EnvelopeError(FringentError):
    """A rejection sampler met a density above its envelope (or below zero)."""


class InternalConsistencyError(FringentError):
    """A closed-form result failed a self-check that should always hold."""
