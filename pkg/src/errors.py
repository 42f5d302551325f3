"""
Errors Module

This module defines the exception hierarchy raised by the model checker.
The workflow layer turns these into result dictionaries with an "error" key.
"""

from typing import List, Optional


class QmcLtlError(Exception):
    """Base class for every error raised by the model checker."""

    error_type = "internal"


class InputError(QmcLtlError):
    """Malformed model file, bad dimensions or otherwise invalid input."""

    error_type = "input"


class FormulaSyntaxError(InputError):
    """The formula text could not be parsed."""

    def __init__(self, message: str, position: Optional[int] = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownPropositionError(InputError):
    """A formula references a proposition the model does not declare."""


class NumericalError(QmcLtlError):
    """A numerical routine failed or produced values outside its contract."""

    error_type = "numerical"


class NumericalDriftError(NumericalError):
    """A density operator drifted beyond the re-projection tolerance."""


class SpectralError(NumericalError):
    """The eigen-structure violates an assumption (e.g. defective peripheral spectrum)."""


class NotPeriodicallyStableError(QmcLtlError):
    """The chain has a contributing peripheral eigenvalue with an irrational angle."""

    error_type = "unstable"

    def __init__(self, offending: List[complex]):
        listed = ", ".join(f"{z.real:+.6f}{z.imag:+.6f}i" for z in offending)
        super().__init__(f"Not periodically stable; offending eigenvalues: {listed}")
        self.offending = list(offending)


class AmbiguityLimitError(QmcLtlError):
    """Too many propositions are ambiguous in an epsilon-neighborhood."""

    error_type = "ambiguity"

    def __init__(self, names: List[str], cap: int):
        super().__init__(
            f"{len(names)} ambiguous propositions exceed the cap of {cap} "
            f"({', '.join(names)}); try a smaller epsilon"
        )
        self.names = list(names)
        self.cap = cap
