"""Exception types shared across the package."""


class ParfidError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(ParfidError):
    """Operands do not share the required block structure / dimensions."""


class NotHermitianError(ParfidError):
    """Input fails the Hermiticity tolerance."""


class NotPSDError(ParfidError):
    """Input has an eigenvalue below the PSD tolerance."""

    def __init__(self, eigenvalue, message=None):
        self.eigenvalue = eigenvalue
        super().__init__(message or f"matrix is not PSD: eigenvalue {eigenvalue:.3e}")


class LocalInvertibilityError(ParfidError):
    """Spectral gap rule for local invertibility is violated."""

    def __init__(self, eigenvalue, tol, message=None):
        self.eigenvalue = eigenvalue
        self.tol = tol
        super().__init__(
            message
            or f"eigenvalue {eigenvalue:.3e} straddles the rank tolerance {tol:.3e}"
        )


class ValidationError(ParfidError):
    """A domain-type invariant failed on construction."""


class PremiseError(ParfidError):
    """A mathematical precondition of an operation does not hold."""


class ConvergenceError(ParfidError):
    """An iterative kernel failed to converge; carries the residual."""

    def __init__(self, residual, message=None):
        self.residual = residual
        super().__init__(message or f"no convergence, residual {residual:.3e}")
