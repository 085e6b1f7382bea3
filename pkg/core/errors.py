"""
Exception hierarchy for the gauge mechanics simulator
"""

from typing import Optional


class GaugeSimError(Exception):
    """Base class for every error raised by the simulator."""


class PathError(GaugeSimError, ValueError):
    """Invalid, empty or undecomposable path."""


class SpacelikeSegmentError(PathError):
    """A segment with elapsed time not exceeding its spatial length."""

    def __init__(self, elapsed: float, length: float):
        self.elapsed = elapsed
        self.length = length
        super().__init__(
            f"Spacelike segment: elapsed time {elapsed!r} does not exceed length {length!r}"
        )


class InvalidEndpointError(GaugeSimError, ValueError):
    """Sampling endpoints that no timelike path can join."""


class ScreenGeometryError(GaugeSimError, ValueError):
    """A terminal event that does not lie on the screen plane."""


class GeometryError(GaugeSimError, ValueError):
    """Experiment geometry that the drivers cannot evaluate."""


class InsufficientFringesError(GaugeSimError):
    """Fewer resolved fringes than an analysis needs."""


class WaveInstabilityError(GaugeSimError):
    """Split-step parameters outside the resolvable phase range."""


class EmptyRegionError(GaugeSimError):
    """No grid points above the density threshold."""


class LatticeTooLargeError(GaugeSimError):
    """Lattice with more paths than exhaustive enumeration allows."""


class ConfigError(GaugeSimError):
    """
    Structured configuration failure.

    Attributes:
        kind: One of 'syntax', 'unknown_key', 'range', 'missing'
        key: Offending key, if any
        line: 1-based line number in the document, if known
    """

    def __init__(self, kind: str, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.kind = kind
        self.key = key
        self.line = line
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{message}")
