"""The brute-force oracles must agree with the vectorized analyses."""

from fractions import Fraction

import numpy as np
import pytest

from isec.core.errors import PreconditionError
from isec.domain.constants import QIConstants
from isec.domain.fibration import Fibration, Section
from isec.services.fibration import pushforward_mass
from isec.services.generators import identity_row_section, iter_sections, random_instance, random_section
from isec.services.metric_core import ball
from isec.services.oracles import (
    oracle_frontier_scan,
    oracle_graph_avoids_cones,
    oracle_minimal_M,
    oracle_pushforward_mass,
    oracle_relation_constants,
)
from isec.services.qi_analysis import graph_avoids_cones, minimal_M, qi_frontier, relative_minimal_M

F = Fraction


def test_oracle_minimal_M(phi_z: Section) -> None:
    result = oracle_minimal_M(phi_z, 1)

    assert result.value == 1
    assert result.witness == (0, 1)
    assert "double loop" in result.method


def test_oracle_scan_matches_the_frontier(g1: Fibration) -> None:
    L_grid = [F(k, 4) for k in range(4, 17)]
    for section in iter_sections(g1):
        frontier = qi_frontier(section)
        for L, M in oracle_frontier_scan(section, L_grid):
            assert frontier.evaluate(L) == M


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_oracle_agrees_on_random_instances(seed: int) -> None:
    rng = np.random.default_rng(seed)
    fibration = random_instance(rng, fibers=5, max_fiber_size=3)
    section = random_section(fibration, rng)

    for L in [1, F(3, 2), 2, 4]:
        assert oracle_minimal_M(section, L).value == minimal_M(section, L)


def test_oracle_relation_constants(phi_z: Section, phi_id: Section) -> None:
    result = oracle_relation_constants(phi_z, phi_id, 0)

    assert result.value == QIConstants(L=F(1), M=F(1))
    assert result.value.M == relative_minimal_M(phi_z, phi_id, 0, 1, strong=True)
    assert result.witness == (1,)


def test_oracle_relation_needs_a_common_base(phi_z: Section, phi_id: Section) -> None:
    with pytest.raises(PreconditionError):
        oracle_relation_constants(phi_z, phi_id, 1)


def test_oracle_cones(g1: Fibration, phi_z: Section) -> None:
    result = oracle_graph_avoids_cones(phi_z, QIConstants(L=F(1), M=F(0)))

    assert result.value is False
    assert result.witness == ((0, 0), (1, 2))
    for section in iter_sections(g1):
        constants = QIConstants(L=F(3, 2), M=F(1, 2))
        assert oracle_graph_avoids_cones(section, constants).value == graph_avoids_cones(
            section, constants
        )


def test_oracle_pushforward_uses_counting_measure_by_default(g9: Fibration) -> None:
    points = ball(g9.space, (4, 0), F(3, 2))

    assert oracle_pushforward_mass(identity_row_section(g9), points).value == 3
    weighted = identity_row_section(g9.with_counting_measure())
    assert oracle_pushforward_mass(weighted, points).value == pushforward_mass(weighted, points)
