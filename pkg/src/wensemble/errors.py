"""Exception hierarchy.

Each concrete class carries the process exit code the CLI maps it to.
"""


class WensembleError(Exception):
    exit_code = 1


class ParseError(WensembleError):
    """Malformed input text. ``source`` and ``line`` locate the offending row."""

    exit_code = 3

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        where = ""
        if source is not None and line is not None:
            where = f"{source}:{line}: "
        elif source is not None:
            where = f"{source}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class AlignmentError(WensembleError):
    """Example identifiers or class sets disagree between inputs."""

    exit_code = 4


class CoverageError(AlignmentError):
    """A labeled example has no decision or prediction."""


class ArityError(WensembleError):
    exit_code = 5


class UndefinedMetricError(WensembleError):
    exit_code = 6


class DegenerateWeightsError(WensembleError):
    exit_code = 6


class StratificationError(WensembleError):
    exit_code = 7
