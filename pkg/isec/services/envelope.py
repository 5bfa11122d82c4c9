"""Upper envelope of affine constraints M >= a - L*b on L in [1, oo).

Every constant-search in the toolkit reduces to a finite family of such
constraints (one per ordered label pair, or one per label for the pointed
relative conditions). Their upper envelope, clipped at 0, is the frontier
M*(L). The computation is exact: on Fraction input every vertex is a Fraction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

from isec.core.numeric import Real
from isec.domain.constants import Frontier, Witness

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Constraint:
    """The affine constraint M >= a - L*b, with b >= 0."""

    a: Real
    b: Real
    witness: Witness | None = None

    def value(self, L: Real) -> Real:
        return self.a - L * self.b


def upper_envelope(
    constraints: Iterable[Constraint], one: Real = 1.0, tolerance: float = 0.0
) -> Frontier:
    """Exact frontier M*(L) = max(0, max_k a_k - L*b_k) as a vertex list.

    ``one`` fixes the arithmetic of the vertices (``Fraction(1)`` on exact
    instances). Lines are deduplicated by slope, keeping the largest
    intercept, and the clipping line M = 0 is added; the envelope is then
    walked from L = 1, jumping each time to the line of the earliest crossing.
    On float input, vertex values within ``tolerance`` of 0 count as 0.
    """
    zero = one - one
    best: Dict[Real, Constraint] = {zero: Constraint(zero, zero, None)}
    for constraint in constraints:
        if constraint.b < 0:
            raise ValueError(f"fiber distances are nonnegative, got b={constraint.b}")
        held = best.get(constraint.b)
        if held is None or constraint.a > held.a:
            best[constraint.b] = constraint
    lines = sorted(best.values(), key=lambda c: c.b)
    logger.debug("envelope over %s distinct slopes", len(lines))

    # Active line at L = 1: highest value, ties going to the flatter line.
    current = max(lines, key=lambda c: (c.value(one), -c.b))
    L_cur = one
    vertices: List[Tuple[Real, Real]] = [(one, current.value(one))]
    witnesses: List[Witness | None] = [current.witness]

    while current.b > 0:
        nxt: Constraint | None = None
        L_next: Real | None = None
        for line in lines:
            if line.b >= current.b:
                break
            crossing = (current.a - line.a) / (current.b - line.b)
            if crossing < L_cur:
                crossing = L_cur
            if L_next is None or crossing < L_next or (crossing == L_next and line.b < nxt.b):
                nxt, L_next = line, crossing
        assert nxt is not None and L_next is not None
        if L_next == L_cur:
            vertices[-1] = (L_cur, vertices[-1][1])
            witnesses[-1] = nxt.witness
        else:
            # flat lines carry their value exactly
            value = nxt.a if nxt.b == 0 else max(zero, current.value(L_next))
            value = min(value, vertices[-1][1])
            vertices.append((L_next, value))
            witnesses.append(nxt.witness)
        current, L_cur = nxt, L_next

    tail = vertices[-1][1]
    L_flat = vertices[-1][0] if tail <= tolerance else None
    if L_flat is not None:
        vertices[-1] = (vertices[-1][0], zero)
        # Only the first vertex at level 0 is kept.
        while len(vertices) > 1 and vertices[-2][1] <= tolerance:
            vertices.pop()
            witnesses.pop()
            vertices[-1] = (vertices[-1][0], zero)
            L_flat = vertices[-1][0]
    return Frontier(breakpoints=tuple(vertices), witnesses=tuple(witnesses), L_flat=L_flat)
