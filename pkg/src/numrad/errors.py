"""Exception types shared across the package."""


class NumradError(Exception):
    """Base class for all package errors."""


class SpaceMismatch(NumradError, ValueError):
    pass


class SpaceParseError(NumradError, ValueError):
    """Malformed space text; ``column`` is 1-based."""

    def __init__(self, message, text="", column=0):
        self.text = text
        self.column = column
        where = f" at column {column}" if column else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)


class AmbiguousFace(NumradError):
    """The norming functional is not unique at a nonsmooth point."""


class UnsupportedSpace(NumradError, ValueError):
    pass


class WitnessTooWeak(NumradError):
    pass


class NotAttaining(NumradError):
    pass


class PreconditionError(NumradError, ValueError):
    pass


class ClosedFormMismatch(NumradError):
    pass
