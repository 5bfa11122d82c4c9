"""Brute-force reference implementations.

Each oracle is straight-line looping over raw distance lookups. None of them
touches the fiber-distance tables, the envelope or the vectorized scans of
the main modules, so agreement between the two paths is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Tuple

from isec.core.errors import PreconditionError
from isec.core.numeric import Real
from isec.domain.constants import QIConstants
from isec.domain.fibration import Label, Section
from isec.domain.metric import Point


@dataclass(frozen=True)
class OracleResult:
    """An oracle's answer, the witness that produced it and the algorithm's name."""

    value: object
    witness: Tuple[object, ...] | None
    method: str


def _d(section: Section, p: Point, q: Point) -> Real:
    space = section.space
    return space.dist[space.index_of(p)][space.index_of(q)]


def _d_fiber(section: Section, p: Point, y: Label) -> Real:
    fiber_of = section.fibration.fiber_of
    return min(_d(section, p, q) for q in fiber_of if fiber_of[q] == y)


def oracle_minimal_M(section: Section, L: object) -> OracleResult:
    """max(0, a - L·b) by a double loop over ordered label pairs."""
    space = section.space
    L = space.coerce(L)
    best, witness = space.coerce(0), None
    for y1 in section.fibration.labels:
        for y2 in section.fibration.labels:
            a = _d(section, section.choice[y1], section.choice[y2])
            b = _d_fiber(section, section.choice[y1], y2)
            if a - L * b > best:
                best, witness = a - L * b, (y1, y2)
    return OracleResult(value=best, witness=witness, method="double loop over ordered label pairs")


def oracle_frontier_scan(section: Section, L_grid: Iterable[object]) -> List[Tuple[Real, Real]]:
    """(L, max(0, a - L·b)) for every L of the grid.

    The (a, b) pairs come from one double loop over ordered label pairs and
    are then maximized directly at each L.
    """
    space = section.space
    labels = section.fibration.labels
    pairs = [
        (
            _d(section, section.choice[y1], section.choice[y2]),
            _d_fiber(section, section.choice[y1], y2),
        )
        for y1 in labels
        for y2 in labels
    ]
    samples = []
    for L in L_grid:
        L = space.coerce(L)
        best = space.coerce(0)
        for a, b in pairs:
            if a - L * b > best:
                best = a - L * b
        samples.append((L, best))
    return samples


def oracle_relation_constants(
    phi: Section, psi: Section, y_hat: Label, L: object = 1
) -> OracleResult:
    """Minimal M of the strong relative relation at a fixed L, label by label."""
    if phi.choice[y_hat] != psi.choice[y_hat]:
        raise PreconditionError(f"sections differ at base label {y_hat!r}")
    space = phi.space
    L = space.coerce(L)
    x_hat = psi.choice[y_hat]
    best, witness = space.coerce(0), None
    for y in phi.fibration.labels:
        gap = _d(phi, phi.choice[y], psi.choice[y])
        reach = min(_d(phi, x_hat, psi.choice[y]), _d(phi, x_hat, phi.choice[y]))
        if gap - L * reach > best:
            best, witness = gap - L * reach, (y,)
    return OracleResult(
        value=QIConstants(L=L, M=best),
        witness=witness,
        method="label sweep of the strong relative inequality",
    )


def oracle_graph_avoids_cones(section: Section, constants: QIConstants) -> OracleResult:
    """Enumerate every cone at every graph point and look for graph points inside."""
    space = section.space
    L, M = space.coerce(constants.L), space.coerce(constants.M)
    tol = space.comparison_tolerance
    fiber_of = section.fibration.fiber_of
    graph = [section.choice[y] for y in section.fibration.labels]
    for x in graph:
        cone = [
            p for p in space.points
            if L * _d_fiber(section, p, fiber_of[x]) + M < _d(section, p, x) - tol
        ]
        for x_prime in graph:
            if x_prime in cone:
                return OracleResult(value=False, witness=(x, x_prime), method="cone enumeration")
    return OracleResult(value=True, witness=None, method="cone enumeration")


def oracle_pushforward_mass(section: Section, points: Iterable[Point]) -> OracleResult:
    """Add up the weight of every label whose chosen point is in the set."""
    measure = section.fibration.measure or {}
    chosen = set(points)
    total = section.space.coerce(0)
    for y in section.fibration.labels:
        if section.choice[y] in chosen:
            total = total + measure.get(y, section.space.coerce(1))
    return OracleResult(value=total, witness=None, method="label-by-label mass count")
