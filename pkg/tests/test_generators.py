"""Tests for the instance and section factories."""

import numpy as np
import pytest

from isec.core.errors import DomainError
from isec.domain.fibration import Fibration
from isec.services.fibration import fiber_diameter_bound
from isec.services.generators import (
    cyclic_product_instance,
    grid_instance,
    iter_sections,
    linear_instance,
    random_instance,
    random_linear_fibration,
    random_linear_section,
    random_section_through,
    row_family,
)
from isec.services.metric_core import dist


def test_grid_layout(g1: Fibration) -> None:
    assert g1.space.points[:3] == ((0, 0), (0, 1), (0, 2))
    assert g1.labels == (0, 1, 2)
    assert g1.space.exact


def test_l1_grid_metric() -> None:
    grid = grid_instance(3, 3, norm="l1")

    assert dist(grid.space, (0, 0), (2, 2)) == 4


def test_grid_needs_positive_sizes() -> None:
    with pytest.raises(DomainError):
        grid_instance(0, 3)


def test_cyclic_product() -> None:
    fibration = cyclic_product_instance(4, 3)

    assert dist(fibration.space, (0, 0), (2, 1)) == 3
    assert dist(fibration.space, (0, 0), (3, 2)) == 2
    assert fiber_diameter_bound(fibration) == 1


def test_random_instance_is_seeded() -> None:
    first = random_instance(np.random.default_rng(11), fibers=4, max_fiber_size=3)
    second = random_instance(np.random.default_rng(11), fibers=4, max_fiber_size=3)

    assert first.fiber_of == second.fiber_of
    assert first.space.dist == second.space.dist
    assert len(first.labels) == 4


def test_random_instance_must_fit_the_lattice() -> None:
    with pytest.raises(DomainError, match="do not fit"):
        random_instance(np.random.default_rng(0), fibers=10, max_fiber_size=3, dimension=1, spread=2)


def test_every_section_is_enumerated(g1: Fibration) -> None:
    sections = list(iter_sections(g1))

    assert len(sections) == 27
    assert len({tuple(s.choice.values()) for s in sections}) == 27


def test_row_family_passes_through_every_point(g1: Fibration) -> None:
    family = row_family(g1)

    assert set(family) == set(g1.space.points)
    for x, section in family.items():
        assert section.choice[g1.fiber_of[x]] == x


def test_section_through_a_point(g1: Fibration) -> None:
    section = random_section_through(g1, np.random.default_rng(3), 1, (1, 2))

    assert section.choice[1] == (1, 2)


def test_linear_instance_grid_range() -> None:
    fibration = linear_instance([[1, 0, 0], [0, 1, 0]], grid_range=(-1, 1))

    assert len(fibration.y_grid) == 9
    assert fibration.null_basis.shape == (3, 1)


def test_random_linear_section_respects_the_anchor() -> None:
    fibration = linear_instance([[1, 1]], grid_range=(-2, 2))
    anchor = fibration.base_point(fibration.grid[0])

    section = random_linear_section(fibration, np.random.default_rng(1), anchor=(0, anchor))

    assert np.allclose(section.vectors[0], anchor)


def test_random_linear_section_stays_in_bounded_fibers() -> None:
    fibration = linear_instance([[1, 0]], grid_range=(-2, 2), fiber_radius=0.5)

    section = random_linear_section(fibration, np.random.default_rng(2), spread=5.0)

    assert np.all(np.abs(section.vectors[:, 1]) <= 0.5 + 1e-12)


def test_random_linear_fibration_has_full_rank() -> None:
    fibration = random_linear_fibration(np.random.default_rng(4), n=3, k=2)

    assert np.linalg.matrix_rank(fibration.matrix) == 2
    assert len(fibration.y_grid) == 5
