"""Exception types shared across the package."""


class GridSynthError(Exception):
    """Base class for all package errors."""


class ParseError(GridSynthError):
    """Malformed program text (unbalanced parentheses, stray tokens)."""


class UnboundVariableError(ParseError):
    """A variable name not bound by any enclosing lambda."""


class UnknownPrimitiveError(ParseError):
    """A symbol that is neither a primitive, an abstraction, nor bound."""


class TypeMismatchError(GridSynthError):
    def __init__(self, expected, found, location=""):
        self.expected = expected
        self.found = found
        self.location = location
        msg = f"expected {expected}, found {found}"
        if location:
            msg += f" in {location}"
        super().__init__(msg)


class EvalError(GridSynthError):
    """Runtime failure while executing a program."""


class OutOfBoundsGetError(EvalError):
    """`get` asked for coordinates outside the observation grid."""

    def __init__(self, x, y, width, height):
        self.x, self.y = x, y
        self.width, self.height = width, height
        super().__init__(f"get ({x},{y}) outside {width}x{height} grid")


class NotDerivableError(GridSynthError):
    """Term uses a production the grammar does not contain."""


class DepthUnsatisfiableError(GridSynthError):
    """No term of the requested type fits within the depth budget."""


class IllegalActionError(GridSynthError):
    """Action outside the environment's action set."""


class UnknownAbstractionError(GridSynthError):
    """Term references a library function that is not defined."""


class UnknownTaskIdError(GridSynthError):
    """Solution map mentions a task id absent from the task set."""


class MultiDigitCodeError(GridSynthError):
    """Prompt encoding requires single-digit object codes."""
