"""Exception hierarchy shared by every module."""


class ModalArraysError(ValueError):
    """Base class for all library errors."""


class InvalidParameterError(ModalArraysError):
    pass


class CoprimalityError(InvalidParameterError):
    pass


class DuplicateLocationError(InvalidParameterError):
    pass


class OrderingError(InvalidParameterError):
    pass


class ShapeError(ModalArraysError):
    pass


class SingularSystemError(ModalArraysError):
    """A linear system that must be solved is rank deficient."""


class PivotSelectionError(SingularSystemError):
    pass


class DegenerateModesError(SingularSystemError):
    """Two modes collapse onto the same decimated value (z_i^d == z_j^d)."""


class PreconditionError(ModalArraysError):
    pass


class ConfigError(ModalArraysError):
    """Configuration problem. ``field`` names the offending key when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if field is not None:
            prefix.append(f"field '{field}'")
        if prefix:
            message = f"{', '.join(prefix)}: {message}"
        super().__init__(message)
