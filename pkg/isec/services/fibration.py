"""Fibers, pushforward measures and fiber diameters."""

from __future__ import annotations

import logging
from typing import FrozenSet, Iterable

import numpy as np

from isec.core.errors import ConfigurationError
from isec.core.numeric import Real
from isec.domain.fibration import Fibration, Label, Section
from isec.domain.metric import Point

logger = logging.getLogger(__name__)


def fiber(fibration: Fibration, y: Label) -> FrozenSet[Point]:
    """pi^-1(y); unknown labels raise ``InstanceError``."""
    indices = fibration.fiber_indices(fibration.label_index(y))
    points = fibration.space.points
    return frozenset(points[i] for i in indices)


def require_measure(fibration: Fibration) -> np.ndarray:
    """Label weights, or ``ConfigurationError`` when the fibration has no measure."""
    weights = fibration.weights()
    if weights is None:
        raise ConfigurationError("this operation needs a measure on the labels")
    return weights


def pushforward_mass(section: Section, points: Iterable[Point]) -> Real:
    """mu(pi(A ∩ phi(Y))): total weight of the labels whose chosen point lies in A."""
    fibration = section.fibration
    weights = require_measure(fibration)
    chosen = {fibration.space.index_of(p) for p in points}
    mask = np.isin(section.indices, sorted(chosen))
    return mass_of(weights, mask, fibration.space.coerce(0))


def mass_of(weights: np.ndarray, mask: np.ndarray, zero: Real) -> Real:
    """Sum of the selected weights in the instance's arithmetic."""
    total = zero
    for weight in weights[np.asarray(mask, dtype=bool)]:
        total = total + weight
    return total


def projected_mass(fibration: Fibration, point_index: int, r: Real) -> Real:
    """mu(pi(B(x, r))): weight of the labels whose fiber meets the open ball."""
    weights = require_measure(fibration)
    row = fibration.fiber_distances()[point_index]
    return mass_of(weights, row < r, fibration.space.coerce(0))


def fiber_diameter_bound(fibration: Fibration) -> Real:
    """The largest fiber diameter ell."""
    matrix = fibration.space.matrix
    best = fibration.space.coerce(0)
    for j in range(len(fibration.labels)):
        indices = fibration.fiber_indices(j)
        diameter = matrix[np.ix_(indices, indices)].max()
        if diameter > best:
            best = diameter
    return best
