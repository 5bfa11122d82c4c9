"""Exact and float scalars.

Exact instances carry ``Fraction`` entries and compare with zero slack; float
instances compare with a tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Real = Union[Fraction, float]


def to_exact(value: object) -> Fraction:
    """Convert ints, floats, Fractions and strings like ``"1/3"`` exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not distances")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} has no exact form")
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact number")


def to_float(value: object) -> float:
    """Convert any supported scalar (including ``"1/3"``) to float."""
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)  # type: ignore[arg-type]


def coerce(value: object, exact: bool) -> Real:
    """Bring a scalar into the arithmetic of an instance."""
    return to_exact(value) if exact else to_float(value)


def leq(lhs: Real, rhs: Real, tol: float) -> bool:
    """``lhs <= rhs`` up to ``tol`` (``tol`` is 0 on exact instances)."""
    return lhs <= rhs + tol if tol else lhs <= rhs


def lt(lhs: Real, rhs: Real, tol: float) -> bool:
    """Strict ``lhs < rhs``, requiring a margin of ``tol`` on float instances."""
    return lhs < rhs - tol if tol else lhs < rhs
