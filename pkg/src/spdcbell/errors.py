"""Exception types raised across the package."""


class SpdcError(Exception):
    """Base class for all package errors."""


class DomainError(SpdcError, ValueError):
    """Invalid mode index, waist or grid parameter."""


class DegenerateInputError(SpdcError, ValueError):
    """A superposition or target vector that is identically zero."""


class DegenerateSubspaceError(SpdcError, ValueError):
    """State has no weight on the requested subspace."""


class BasisMismatchError(SpdcError, ValueError):
    """State mode-set does not contain the modes an operation needs."""


class NonUnitaryError(SpdcError, ValueError):
    pass


class UndefinedCorrelationError(SpdcError, ArithmeticError):
    """All four coincidence counts of a correlation are zero."""


class NoiseSpecError(SpdcError, ValueError):
    pass


class IllPosedDesignError(SpdcError, ArithmeticError):
    """Design map is rank deficient and no regularization was given."""


class HologramConfigError(SpdcError, ValueError):
    """SLM settings that cannot resolve or separate the first diffraction order."""


class ConvergenceError(SpdcError, ArithmeticError):
    """Two quadrature resolutions disagree beyond tolerance.

    Attributes:
        coarse: value at the reduced node count.
        fine: value at the requested node count.
        indices: optional (signal, idler) label of the offending entry.
    """

    def __init__(self, coarse, fine, indices=None):
        self.coarse = coarse
        self.fine = fine
        self.indices = indices
        where = f" at {indices}" if indices is not None else ""
        super().__init__(
            f"quadrature not converged{where}: coarse={coarse!r}, fine={fine!r}"
        )
