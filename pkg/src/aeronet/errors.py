"""Exception types shared across the analytic and simulation pipelines."""


class AeronetError(Exception):
    """Base class for all library errors."""


class DomainError(AeronetError):
    """An input is outside the mathematical domain of an operation."""


class NonConvergent(AeronetError):
    """An adaptive quadrature exhausted its subdivision budget."""


class SeriesNonConvergent(AeronetError):
    """A truncated series failed its early-stop convergence test."""


class DerivativeUnstable(AeronetError):
    """Richardson-extrapolated derivative estimates disagree too much."""


class PreconditionViolated(AeronetError):
    """A result is only proved under conditions the inputs do not meet."""


class DegenerateGeometry(AeronetError):
    """A geometric configuration makes the requested quantity collapse."""


class NoCandidate(AeronetError):
    """No association target exists for the typical node."""


class ValidationError(AeronetError):
    """A configuration violates one or more invariants."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
