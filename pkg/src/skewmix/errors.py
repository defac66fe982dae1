"""Exception hierarchy.

Validation problems (bad input, hypotheses not met) map to CLI exit code 1,
numerical failures to exit code 2, failed inequality checks to exit code 3.
"""


class SkewmixError(Exception):
    exit_code = 2


class ValidationError(SkewmixError):
    exit_code = 1


class NumericalError(SkewmixError):
    exit_code = 2


class InvariantViolation(SkewmixError):
    exit_code = 3


class ParseError(ValidationError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ParseError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class DomainError(ValidationError):
    """Expression evaluated outside its domain (log of non-positive, 1/0, overflow)."""


class ConfigError(ValidationError):
    pass


class NotExpanding(ValidationError):
    pass


class NotCovering(ValidationError):
    pass


class NonMonotoneBranch(ValidationError):
    pass


class DegenerateImage(ValidationError):
    pass


class NonPositiveDensity(ValidationError):
    pass


class DomainMismatch(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass


class NotConverged(NumericalError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class CapExceeded(NumericalError):
    pass


class PanelCapExceeded(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class ConventionMismatch(NumericalError):
    pass


class InsufficientData(NumericalError):
    pass


class TauPiecewiseConstant(Exception):
    """Verdict rather than failure: tau has zero derivative on every branch.

    Such a tau is trivially cohomologous to a piecewise constant, with
    ``chi = tau`` and ``theta = 0``.
    """

    exit_code = 0

    def __init__(self, tau):
        super().__init__("tau piecewise constant - trivially cohomologous")
        self.tau = tau
        self.chi = tau
        self.theta = 0.0
