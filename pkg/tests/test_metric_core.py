"""Tests for finite metric spaces, balls and distances to sets."""

import math
from fractions import Fraction

import pytest
from pydantic import ValidationError

from isec.core.errors import DomainError, InstanceError
from isec.domain.fibration import Fibration
from isec.domain.metric import FiniteMetricSpace, NormedInstance
from isec.services.metric_core import (
    ball,
    diameter,
    dist,
    dist_to_set,
    dist_to_set_with_witness,
    normed_distance_agrees,
)


def _space(dist_rows, exact: bool = False) -> FiniteMetricSpace:
    return FiniteMetricSpace(points=tuple(range(len(dist_rows))), dist=dist_rows, exact=exact)


def test_dist_on_grid(g1: Fibration) -> None:
    space = g1.space

    assert dist(space, (0, 0), (1, 2)) == 2
    assert dist(space, (2, 1), (2, 1)) == 0


def test_dist_unknown_point(g1: Fibration) -> None:
    with pytest.raises(InstanceError, match="unknown point"):
        dist(g1.space, (0, 0), (5, 5))


def test_exact_grid_keeps_fractions(g1: Fibration) -> None:
    assert isinstance(dist(g1.space, (0, 0), (2, 2)), Fraction)


def test_dist_to_set_returns_lowest_index_witness(g1: Fibration) -> None:
    value, witness = dist_to_set_with_witness(g1.space, (1, 1), [(2, 2), (0, 0), (2, 0)])

    assert value == 1
    assert witness == (0, 0)
    assert dist_to_set(g1.space, (1, 1), [(2, 2)]) == 1


def test_dist_to_empty_set(g1: Fibration) -> None:
    with pytest.raises(DomainError, match="empty"):
        dist_to_set(g1.space, (0, 0), [])


def test_balls_are_open(g1: Fibration) -> None:
    space = g1.space

    assert ball(space, (0, 0), 0) == frozenset()
    assert ball(space, (0, 0), 1) == {(0, 0)}
    assert ball(space, (0, 0), 1.5) == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_balls_grow_with_radius(g1: Fibration) -> None:
    radii = [0, 0.5, 1, 1.5, 2, 2.5, 3]
    for x in g1.space.points:
        balls = [ball(g1.space, x, r) for r in radii]
        assert all(small <= large for small, large in zip(balls, balls[1:]))


def test_diameter(g1: Fibration) -> None:
    assert diameter(g1.space) == 2
    assert diameter(g1.space, [(0, 0), (1, 0)]) == 1
    with pytest.raises(DomainError):
        diameter(g1.space, [])


def test_triangle_violation_names_first_triple() -> None:
    with pytest.raises(ValidationError, match=r"triangle inequality violated at \(0, 1, 2\)"):
        _space([[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_trusted_space_skips_triangle_scan() -> None:
    space = FiniteMetricSpace(
        points=(0, 1, 2), dist=[[0, 1, 5], [1, 0, 1], [5, 1, 0]], trusted=True
    )

    assert space.size == 3


@pytest.mark.parametrize(
    ("rows", "message"),
    [
        ([[0, 1], [2, 0]], "not symmetric"),
        ([[0, -1], [-1, 0]], "negative distance"),
        ([[1, 1], [1, 0]], r"dist\[0\]\[0\] must be 0"),
        ([[0, 0], [0, 0]], "not separated"),
        ([[0, 1, 1], [1, 0]], "must be 2 x 2"),
        ([[0, math.inf], [math.inf, 0]], "non-finite"),
    ],
)
def test_invalid_matrices(rows, message: str) -> None:
    with pytest.raises(ValidationError, match=message):
        FiniteMetricSpace(points=tuple(range(len(rows))), dist=rows)


def test_duplicate_points_rejected() -> None:
    with pytest.raises(ValidationError, match="duplicate point"):
        FiniteMetricSpace(points=(0, 0), dist=[[0, 1], [1, 0]])


def test_float_instance_tolerates_rounding() -> None:
    space = _space([[0, 0.1 + 0.2], [0.3, 0]])

    assert space.comparison_tolerance == 1e-9


def test_exact_instance_parses_rationals() -> None:
    space = _space([[0, "1/3"], ["1/3", 0]], exact=True)

    assert space.matrix[0, 1] == Fraction(1, 3)
    assert space.comparison_tolerance == 0.0


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_normed_instance_agrees_with_direct_norms(norm: str) -> None:
    instance = NormedInstance(
        dimension=2,
        norm_kind=norm,
        vectors=((0.0, 0.0), (3.0, 4.0), (-1.0, 2.5), (0.5, -0.5)),
    )

    assert normed_distance_agrees(instance)
    space = instance.to_metric_space()
    expected = {"l1": 7.0, "l2": 5.0, "linf": 4.0}[norm]
    assert space.matrix[0, 1] == pytest.approx(expected)


def test_normed_instance_rejects_ragged_vectors() -> None:
    with pytest.raises(ValidationError, match="expected 2"):
        NormedInstance(dimension=2, vectors=((0.0, 0.0), (1.0,)))
