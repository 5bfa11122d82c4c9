"""Quasi-isometry constants and the frontier of admissible constants."""

from __future__ import annotations

import math
from typing import Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from isec.core.errors import DomainError
from isec.core.numeric import Real
from isec.domain.fibration import Label

# A binding constraint: an ordered label pair (y1, y2), or a single label for
# the pointed relative constraints.
Witness = Tuple[Label, ...]


class QIConstants(BaseModel):
    """A multiplicative constant L >= 1 and an additive constant M >= 0."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    L: Real = Field(..., description="Multiplicative constant, at least 1")
    M: Real = Field(default=0.0, description="Additive constant, at least 0")

    @field_validator("L")
    @classmethod
    def validate_L(cls, v: Real) -> Real:  # noqa: N802
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError("L must be finite")
        if v < 1:
            raise ValueError("L must be greater than or equal to 1")
        return v

    @field_validator("M")
    @classmethod
    def validate_M(cls, v: Real) -> Real:  # noqa: N802
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError("M must be finite")
        if v < 0:
            raise ValueError("M must be greater than or equal to 0")
        return v

    def dominates(self, other: "QIConstants") -> bool:
        """True when both constants are at least those of ``other``."""
        return self.L >= other.L and self.M >= other.M


class Infeasible(BaseModel):
    """No finite constant exists; ``witness`` names the obstruction."""

    model_config = ConfigDict(frozen=True)

    reason: str
    witness: Witness | None = None


class Frontier(BaseModel):
    """The convex, nonincreasing, piecewise-linear function L -> M*(L) on [1, oo).

    ``breakpoints`` are the vertices in increasing L; after the last vertex the
    function is constant. ``witnesses[i]`` is the constraint binding on the
    segment starting at ``breakpoints[i]``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    breakpoints: Tuple[Tuple[Real, Real], ...]
    witnesses: Tuple[Witness | None, ...] = ()
    L_flat: Real | None = Field(
        default=None,
        description="Smallest L with M*(L) = 0, or None when M* stays positive",
    )

    @model_validator(mode="after")
    def validate_shape(self) -> "Frontier":
        if not self.breakpoints:
            raise ValueError("a frontier has at least one vertex")
        if self.breakpoints[0][0] != 1:
            raise ValueError("the first vertex must sit at L = 1")
        for (l0, m0), (l1, m1) in zip(self.breakpoints, self.breakpoints[1:]):
            if not l1 > l0:
                raise ValueError("breakpoints must be strictly increasing in L")
            if m1 > m0:
                raise ValueError("the frontier must be nonincreasing")
        return self

    @property
    def tail(self) -> Real:
        """Value of M* for all L beyond the last vertex."""
        return self.breakpoints[-1][1]

    def evaluate(self, L: Real) -> Real:
        """M*(L) by interpolation between vertices."""
        if L < 1:
            raise DomainError(f"L must be at least 1, got {L}")
        points = self.breakpoints
        for (l0, m0), (l1, m1) in zip(points, points[1:]):
            if l0 <= L <= l1:
                return m0 + (m1 - m0) * (L - l0) / (l1 - l0)
        return self.tail

    def minimal_L(self, M: Real) -> Union[Real, Infeasible]:
        """Smallest L >= 1 with M*(L) <= M."""
        if M < 0:
            raise DomainError(f"M must be nonnegative, got {M}")
        if self.tail > M:
            return Infeasible(
                reason=f"M*(L) never drops below {float(self.tail)}",
                witness=self.witnesses[-1] if self.witnesses else None,
            )
        points = self.breakpoints
        if points[0][1] <= M:
            return points[0][0]
        for (l0, m0), (l1, m1) in zip(points, points[1:]):
            if m0 > M >= m1:
                return l0 + (m0 - M) * (l1 - l0) / (m0 - m1)
        raise AssertionError("unreachable: tail <= M but no crossing found")

