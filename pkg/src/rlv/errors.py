"""Exception types shared across the package."""


class RlvError(Exception):
    """Base class for all errors raised by rlv."""


class ParseError(RlvError):
    """Syntax or name error in model / formula text, with position info."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, col {col}: {message}"
        super().__init__(message)


class StructureError(RlvError):
    """Operands belong to different systems, or an object is ill-formed."""


class EvalError(RlvError):
    """Runtime evaluation failure (e.g. division by zero)."""


class ExpandError(RlvError):
    """State-space expansion of a machine failed."""


class GenerationError(RlvError):
    """A proof generator refused its inputs; carries witness details."""

    def __init__(self, message, failures=()):
        self.failures = tuple(failures)
        super().__init__(message)
