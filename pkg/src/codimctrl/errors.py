"""Exception types shared across the toolkit.

Validation failures (bad arguments, violated preconditions) map to CLI exit
code 2, numerical failures (non-convergent quadrature, stagnant solvers,
overflow in diagnostic branches) to exit code 3.
"""


class ValidationError(ValueError):
    """A precondition on user-supplied parameters is violated."""


class DtTooCoarseError(ValidationError):
    """Time-sampled control grid violates the documented accuracy bound."""


class NumericalError(RuntimeError):
    """Base class for runtime numerical failures."""


class QuadratureDivergenceError(NumericalError):
    """Panel-doubling quadrature failed to converge to the requested tolerance."""


class HyperbolicOverflowError(NumericalError):
    """Hyperbolic mode branch would require exp of an argument beyond 700."""


class CgStagnationError(NumericalError):
    """Conjugate gradient stagnated; the operator is effectively singular.

    Carries the eigenvalue diagnostics of the operator so callers can report
    the defect structure alongside the failure.
    """

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class CertificationError(NumericalError):
    """A synthesized control failed its independent endpoint certification."""


class KktSingularError(NumericalError):
    """The reduced KKT system is singular; carries Gramian defect diagnostics."""

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class InfeasibleRelaxationError(NumericalError):
    """The relaxed endpoint ball is unreachable for the discrete system."""
