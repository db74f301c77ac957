"""Exception hierarchy.

Two families matter to callers: :class:`NumericFailure` (the computation ran
but could not meet its tolerance) and :class:`InputError` (the request itself
is malformed). The CLI maps them to exit codes 1 and 2.
"""

from __future__ import annotations


class KLPolyError(Exception):
    """Base class for every error raised by the engine."""


class NumericFailure(KLPolyError):
    """A computation could not reach its tolerance."""


class InputError(KLPolyError, ValueError):
    """Invalid parameters, grids or expressions."""


class NonConvergence(NumericFailure):
    def __init__(self, message: str, axis: str | None = None):
        super().__init__(message if axis is None else f"{message} (axis: {axis})")
        self.axis = axis


class NonFinite(NumericFailure):
    pass


class TailNotResolvable(NumericFailure):
    pass


class NonIntegrable(NumericFailure):
    pass


class NotConverged(NumericFailure):
    pass


class SingularSymbol(NumericFailure):
    def __init__(self, y: float, modulus: float, delta: float):
        super().__init__(
            f"|1 + F_c phi| = {modulus:.3e} < {delta:.1e} at y = {y:.6g}"
        )
        self.y = y
        self.modulus = modulus
        self.delta = delta


class ConditionNotSatisfied(NumericFailure):
    pass


class DivisionUnstable(NumericFailure):
    pass


class DomainError(InputError):
    pass


class WeightVanishes(InputError):
    pass


class ParseError(InputError):
    def __init__(self, text: str, position: int, expected: str):
        super().__init__(f"at position {position}: expected {expected} in {text!r}")
        self.text = text
        self.position = position
        self.expected = expected
