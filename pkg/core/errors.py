"""Exception hierarchy shared by the core modules and the CLI."""
from typing import Optional, Sequence


class KemenyToolError(Exception):
    pass


class GraphFormatError(KemenyToolError, ValueError):
    """Malformed graph input. *line* is the 1-based input line, when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedGraphError(KemenyToolError):
    """The graph (or a perturbed version of it) is not connected.

    *component* holds the labels of one connected component that is separated
    from the rest of the graph.
    """

    def __init__(self, message: str, component: Sequence = ()):
        self.component = tuple(component)
        super().__init__(message)


class NumericalBreakdownError(KemenyToolError):
    pass


class PoleError(KemenyToolError, ZeroDivisionError):
    pass


class ScoreUniverseError(KemenyToolError, ValueError):
    pass
