"""Exception types shared across the simulator."""

from __future__ import annotations


class SimulatorError(Exception):
    """Base class for all errors raised by this package."""


class ZeroStateError(SimulatorError):
    """An operation that needs a nonzero state received one with zero norm."""


class OverlappingPathsError(SimulatorError):
    """Tensor product operands share a path identifier."""


class SpecInvariantError(SimulatorError):
    """An element spec violates one of its structural invariants."""


class UnexpectedFrequencyError(SimulatorError):
    """A photon sits on an element input path with a frequency bin the
    element does not expect; the circuit is miswired."""


class CapExceededError(SimulatorError):
    """The dense oracle was asked to enumerate a basis beyond its caps."""


class CompileError(SimulatorError):
    """A circuit AST cannot be lowered to an executable pipeline."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line else message)
