"""Distances, distances to sets, and open balls in a finite metric space."""

from __future__ import annotations

import logging
from typing import FrozenSet, Iterable, Tuple

import numpy as np

from isec.core.errors import DomainError
from isec.core.numeric import Real
from isec.domain.metric import FiniteMetricSpace, NormedInstance, Point

logger = logging.getLogger(__name__)


def dist(space: FiniteMetricSpace, x1: Point, x2: Point) -> Real:
    """d(x1, x2); unknown identifiers raise ``InstanceError``."""
    return space.matrix[space.index_of(x1), space.index_of(x2)]


def dist_to_set_with_witness(
    space: FiniteMetricSpace,
    x: Point,
    points: Iterable[Point],
) -> Tuple[Real, Point]:
    """d(x, S) together with the lowest-index point of S attaining it."""
    indices = sorted({space.index_of(p) for p in points})
    if not indices:
        raise DomainError("distance to the empty set is undefined")
    row = space.matrix[space.index_of(x), indices]
    best = int(np.argmin(row))
    return row[best], space.points[indices[best]]


def dist_to_set(space: FiniteMetricSpace, x: Point, points: Iterable[Point]) -> Real:
    """d(x, S) = min over a in S of d(x, a)."""
    value, _ = dist_to_set_with_witness(space, x, points)
    return value


def ball(space: FiniteMetricSpace, x: Point, r: object) -> FrozenSet[Point]:
    """The open ball {x' : d(x, x') < r}; empty when r <= 0."""
    radius = space.coerce(r)
    row = space.matrix[space.index_of(x)]
    inside = np.asarray(row < radius, dtype=bool)
    return frozenset(space.points[i] for i in np.flatnonzero(inside))


def diameter(space: FiniteMetricSpace, points: Iterable[Point] | None = None) -> Real:
    """Largest distance within ``points`` (the whole space by default)."""
    if points is None:
        indices = np.arange(space.size)
    else:
        indices = np.array(sorted({space.index_of(p) for p in points}), dtype=int)
    if indices.size == 0:
        raise DomainError("the empty set has no diameter")
    return space.matrix[np.ix_(indices, indices)].max()


def normed_distance_agrees(instance: NormedInstance, tolerance: float = 1e-12) -> bool:
    """Compare the induced matrix with a direct norm evaluation of every difference."""
    matrix = instance.distance_matrix()
    vectors = np.asarray(instance.vectors, dtype=float)
    for i, u in enumerate(vectors):
        for j, v in enumerate(vectors):
            if abs(matrix[i, j] - instance.norm(u - v)) > tolerance:
                logger.warning("normed distance mismatch at (%s, %s)", i, j)
                return False
    return True
