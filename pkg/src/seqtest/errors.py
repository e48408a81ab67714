"""Exception types shared across the package."""


class DomainError(ValueError):
    """A belief argument lies outside the open interval (0, 1)."""


class ParameterError(ValueError):
    """A model or numerical parameter is out of range."""


class UnsupportedPenaltyError(TypeError):
    """The requested operation needs a C^2 penalty."""


class BracketError(RuntimeError):
    """A root bracket did not contain a sign change."""


class SolverFailure(RuntimeError):
    """The common-tangent solve did not converge.

    ``diagnostics`` carries the bracket and end-point values for inspection.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DegenerateRegime(Exception):
    """No continuation region: immediate stopping is optimal."""


class MultipleContinuationRegions(Exception):
    """The envelope has more than one affine piece; not solved here."""
