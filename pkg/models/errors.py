from typing import Optional


class LZROError(Exception):
    """Base class for every simulation, analysis and configuration failure."""


class NoCrossing(LZROError):
    """The drive never brings the effective detuning through zero."""


class NotACrossing(LZROError):
    """A time passed as a crossing does not zero the effective detuning."""


class DegenerateFrame(LZROError):
    """Coupling and detuning vanish together, so the eigenbasis is undefined."""


class StepTooCoarse(LZROError):
    """The requested accuracy cannot be met above the minimum step size."""


class TruncationTooSmall(LZROError):
    """The motional ladder cannot reach the required Boltzmann coverage."""


class MismatchedGrids(LZROError):
    """Traces to be averaged do not share the same sample times."""


class TooSparse(LZROError):
    """A trace is sampled too coarsely for contrast extraction."""


class FitDiverged(LZROError):
    """Levenberg damping was exhausted without lowering the residual."""


class UnknownPreset(LZROError):
    """The requested preset name is not registered."""


class ConfigError(LZROError):
    """
    Invalid run configuration.

    Args:
        message (str): Human readable diagnostic.
        field (str, optional): Offending configuration key.
        line (int, optional): Line in the config file, for syntax errors.
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def __str__(self):
        location = ""
        if self.line is not None:
            location += f"line {self.line}: "
        if self.field is not None:
            location += f"field '{self.field}': "
        return f"{location}{self.args[0]}"
