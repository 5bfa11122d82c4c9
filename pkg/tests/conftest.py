"""Shared fixtures: the 3 x 3 and 9 x 3 l-infinity grids and their sections."""

from fractions import Fraction

import pytest

from isec.domain.fibration import Fibration, Section
from isec.services.generators import grid_instance, identity_row_section, zigzag_section


@pytest.fixture
def g1() -> Fibration:
    """Points (i, j), i, j < 3, fibered by columns i."""
    return grid_instance(3, 3)


@pytest.fixture
def g9() -> Fibration:
    """Nine columns of three points each."""
    return grid_instance(3, 9)


@pytest.fixture
def phi_id(g1: Fibration) -> Section:
    """The bottom row, {y -> (y, 0)}."""
    return identity_row_section(g1)


@pytest.fixture
def phi_z(g1: Fibration) -> Section:
    """{0 -> (0, 0), 1 -> (1, 2), 2 -> (2, 0)}."""
    return zigzag_section(g1)


@pytest.fixture
def phi_w(g1: Fibration) -> Section:
    """The diagonal, agreeing with phi_id and phi_z over label 0."""
    return Section(fibration=g1, choice={0: (0, 0), 1: (1, 1), 2: (2, 2)})


@pytest.fixture
def one() -> Fraction:
    return Fraction(1)
