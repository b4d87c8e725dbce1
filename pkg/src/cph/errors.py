"""Exception hierarchy shared by every module.

Each class maps onto one CLI exit code (see :mod:`cph.cli`).
"""


class CphError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(CphError, ValueError):
    """Shapes of the operands do not fit together."""


class DomainError(CphError, ValueError):
    """An input lies outside the domain of the operation (e.g. not PSD)."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class PreconditionError(CphError, ValueError):
    """A documented precondition (contractivity, purity, ...) fails."""


class ConvergenceError(CphError, RuntimeError):
    """An iteration did not settle within its budget."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class StructureError(CphError, RuntimeError):
    """A spectral or combinatorial structure contradicts the theory.

    Raised e.g. for a Jordan block on the unit circle, or a recurrent
    Markov class whose Perron vector is not strictly positive.
    """
