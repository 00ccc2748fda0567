"""Exception types shared across the package."""


class ScmilabError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(ScmilabError):
    """A named coordinate is missing from a joint table, or names clash."""


class ValidationError(ScmilabError):
    """An input object violates one of its declared invariants."""


class EnumerationTooLarge(ScmilabError):
    """The exact joint would exceed the configured atom cap."""

    def __init__(self, round_index: int, projected: int, cap: int):
        self.round_index = round_index
        self.projected = projected
        self.cap = cap
        super().__init__(
            f"enumeration exceeds cap at round {round_index}: "
            f"projected {projected} atoms > cap {cap}"
        )


class ExchangeabilityError(ScmilabError):
    """An operation that requires row exchangeability was given a kernel
    without the declared (and verified) flag."""


class InfeasibleParameters(ScmilabError):
    """Bound parameters fail their feasibility condition."""

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        super().__init__(message)


class ConfigError(ScmilabError):
    """A configuration file could not be parsed or validated."""
