"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid physical or numerical input (maps to CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A computation failed to converge or produced an inconsistent value."""


class TsirelsonViolation(NumericalError):
    """A CHSH value exceeded 2*sqrt(2); always indicates a bug upstream."""
