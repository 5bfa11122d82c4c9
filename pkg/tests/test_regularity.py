"""Tests for large-scale regularity estimates, homogeneity and their transfer."""

from fractions import Fraction

import pytest

from isec.core.errors import DomainError, PreconditionError
from isec.domain.constants import Infeasible, QIConstants
from isec.domain.fibration import Fibration, Section
from isec.domain.metric import FiniteMetricSpace
from isec.services.generators import identity_row_section, zigzag_section
from isec.services.regularity import (
    ad_regularity_estimate,
    ball_inclusion_check,
    build_regularity_report,
    derived_constants,
    graph_masses,
    homogeneity_constant,
    transfer_regularity,
)

F = Fraction
R_GRID = [2, 3, 4, 5]


def _constants(L, M) -> QIConstants:
    return QIConstants(L=F(L), M=F(M))


def test_graph_masses_of_the_bottom_row(g9: Fibration) -> None:
    masses = graph_masses(identity_row_section(g9), [F(r) for r in R_GRID])

    assert [min(row) for row in masses] == [2, 3, 4, 5]
    assert [max(row) for row in masses] == [3, 5, 7, 9]


def test_regularity_estimate(g9: Fibration) -> None:
    estimate = ad_regularity_estimate(identity_row_section(g9), 1, 1, R_GRID)

    assert estimate.c1 == 1
    assert estimate.c2 == F(9, 5)
    assert estimate.lower_witness == (0, 2)
    assert estimate.upper_witness == (4, 5)


def test_regularity_estimate_rejects_bad_parameters(g9: Fibration) -> None:
    section = identity_row_section(g9)

    with pytest.raises(DomainError):
        ad_regularity_estimate(section, 0, 1, R_GRID)
    with pytest.raises(DomainError, match="does not exceed"):
        ad_regularity_estimate(section, 1, 2, R_GRID)
    with pytest.raises(DomainError, match="empty"):
        ad_regularity_estimate(section, 1, 1, [])


def test_homogeneity_on_the_grid(g9: Fibration) -> None:
    assert homogeneity_constant(g9, 1, R_GRID) == 1


def test_homogeneity_is_infeasible_with_a_null_ball() -> None:
    space = FiniteMetricSpace(
        points=("a", "b", "c"),
        dist=[[0, 10, 1], [10, 0, 9], [1, 9, 0]],
        exact=True,
    )
    fibration = Fibration(
        space=space,
        labels=(0, 1),
        fiber_of={"a": 0, "b": 0, "c": 1},
        measure={0: F(0), 1: F(1)},
    )

    result = homogeneity_constant(fibration, 1, [2])

    assert isinstance(result, Infeasible)
    assert result.witness == (0,)


def test_derived_constants() -> None:
    assert derived_constants(F(1), F(1), F(1), F(2), F(1)) == (F(1, 2), 2)


def test_regularity_report(g9: Fibration) -> None:
    report = build_regularity_report(identity_row_section(g9), _constants(1, 0), 1, 1, R_GRID)

    assert report.C == 1
    assert (report.c1, report.c2) == (1, F(9, 5))
    assert (report.c3, report.c4) == (1, F(9, 5))
    assert all(v.holds for v in report.verdicts)
    assert report.fitted_Q == pytest.approx(1, abs=0.3)


def test_regularity_report_needs_valid_constants(g9: Fibration) -> None:
    with pytest.raises(PreconditionError, match="not QI"):
        build_regularity_report(zigzag_section(g9), _constants(1, 0), 1, 1, R_GRID)


def test_transfer_to_the_zigzag(g9: Fibration) -> None:
    report = build_regularity_report(identity_row_section(g9), _constants(1, 0), 1, 1, R_GRID)

    transfer = transfer_regularity(zigzag_section(g9), report, 1, 1, R_GRID)

    assert transfer.verdict
    assert (transfer.c3, transfer.c4) == (1, F(9, 5))
    lowest = {}
    for margin in transfer.margins:
        lowest[margin.r] = min(lowest.get(margin.r, margin.mass), margin.mass)
    assert [lowest[F(r)] for r in R_GRID] == [1, 3, 4, 5]
    assert not any(m.vacuous for m in transfer.margins)
    assert transfer.inclusion is not None and transfer.inclusion.verdict


def test_transfer_marks_small_radii_vacuous(g9: Fibration) -> None:
    report = build_regularity_report(identity_row_section(g9), _constants(1, 0), 1, 1, R_GRID)

    transfer = transfer_regularity(zigzag_section(g9), report, 1, 2, R_GRID)

    assert all(m.vacuous for m in transfer.margins if m.r <= 2)
    assert all(m.lower == 0 for m in transfer.margins if m.vacuous)


def test_transfer_rejects_larger_report_constants(g9: Fibration) -> None:
    report = build_regularity_report(zigzag_section(g9), _constants(1, 1), 1, 1, R_GRID)

    with pytest.raises(PreconditionError, match="larger constants"):
        transfer_regularity(identity_row_section(g9), report, 1, 0, R_GRID)


def test_ball_inclusions_hold_for_qi_sections(phi_z: Section) -> None:
    report = ball_inclusion_check(phi_z, _constants(1, 1), [1, 2, 3])

    assert report.verdict
    assert report.failures == []


def test_ball_inclusions_need_valid_constants(phi_z: Section) -> None:
    with pytest.raises(PreconditionError):
        ball_inclusion_check(phi_z, _constants(1, 0), [1, 2])
