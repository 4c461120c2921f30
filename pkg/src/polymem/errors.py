"""Exception types shared across the library.

Every error the library raises derives from PolymemError, so callers can
catch one type at the CLI boundary and map it to an exit code.
"""


class PolymemError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(PolymemError):
    """Operand shapes do not conform."""


class DomainError(PolymemError):
    """A scalar argument lies outside the mathematically valid range."""


class ConfigError(PolymemError):
    """An invalid configuration value (flags, init spec, schedule)."""


class FormatError(PolymemError):
    """A file does not match its declared on-disk format.

    ``offset`` carries the byte offset at which parsing failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DivergenceError(PolymemError):
    """A numerical computation produced non-finite values.

    Carries the coordinates of the first bad value: ``step`` is the
    timestep inside a sequence, ``epoch``/``batch`` locate a training run.
    """

    def __init__(self, message: str, step: int | None = None,
                 epoch: int | None = None, batch: int | None = None):
        super().__init__(message)
        self.step = step
        self.epoch = epoch
        self.batch = batch


class IntegrityError(PolymemError):
    """A trajectory/cache does not belong to the parameters it is used with."""


class InsufficientDataError(PolymemError):
    """Too few usable points for a fit."""
