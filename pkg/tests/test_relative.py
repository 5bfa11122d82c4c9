"""Tests for relative and pointed QI, constant transfer and the strong relation."""

from fractions import Fraction

import pytest

from isec.core.errors import DomainError, PreconditionError
from isec.domain.constants import QIConstants
from isec.domain.fibration import Fibration, Section
from isec.domain.metric import FiniteMetricSpace
from isec.services.generators import row_family
from isec.services.qi_analysis import (
    constant_transfer_check,
    global_equivalence_check,
    is_pointed_qi,
    is_qi_section,
    is_relative_qi,
    is_strong_relative_qi,
    pointed_minimal_M,
    relative_frontier,
    relative_minimal_M,
    sound_forward_constants,
    strong_relation_check,
    transfer_constants_backward,
    transfer_constants_forward,
)

F = Fraction


def _constants(L, M) -> QIConstants:
    return QIConstants(L=F(L), M=F(M))


def _line_instance() -> Fibration:
    """Four points on a line at 0, 1, 2, 4; x0 alone over 0, the rest over 1."""
    space = FiniteMetricSpace(
        points=("x0", "r", "p", "q"),
        dist=[[0, 1, 2, 4], [1, 0, 1, 3], [2, 1, 0, 2], [4, 3, 2, 0]],
        exact=True,
    )
    return Fibration(space=space, labels=(0, 1), fiber_of={"x0": 0, "r": 1, "p": 1, "q": 1})


def test_relative_constants_against_the_identity_row(phi_z: Section, phi_id: Section) -> None:
    """Test relative constants of the zig-zag against the bottom row."""
    assert relative_minimal_M(phi_z, phi_id, 0, 1) == 1
    assert relative_minimal_M(phi_z, phi_id, 0, 1, strong=True) == 1
    assert is_relative_qi(phi_z, phi_id, 0, _constants(1, 1))
    assert not is_relative_qi(phi_z, phi_id, 0, _constants(1, 0))
    assert is_strong_relative_qi(phi_z, phi_id, 0, _constants(1, 1))


def test_relative_frontier(phi_z: Section, phi_id: Section) -> None:
    frontier = relative_frontier(phi_z, phi_id, 0)

    assert frontier.breakpoints == ((1, 1), (2, 0))
    assert frontier.witnesses[0] == (1,)


def test_strong_implies_plain(g1: Fibration, phi_z: Section, phi_id: Section, phi_w: Section) -> None:
    """Test that strong relative QI implies relative QI."""
    for phi in (phi_z, phi_w):
        for L, M in [(1, 0), (1, 1), (2, 0), (F(3, 2), F(1, 2))]:
            if is_strong_relative_qi(phi, phi_id, 0, _constants(L, M)):
                assert is_relative_qi(phi, phi_id, 0, _constants(L, M))


def test_relative_needs_a_common_base_point(phi_z: Section, phi_id: Section) -> None:
    with pytest.raises(PreconditionError, match="differ at base label 1"):
        is_relative_qi(phi_z, phi_id, 1, _constants(1, 1))


def test_relative_rejects_small_L(phi_z: Section, phi_id: Section) -> None:
    with pytest.raises(DomainError):
        relative_minimal_M(phi_z, phi_id, 0, F(1, 2))


def test_pointed_qi(phi_z: Section) -> None:
    assert is_pointed_qi(phi_z, 0, _constants(2, 0))
    assert not is_pointed_qi(phi_z, 0, _constants(1, 0))
    assert pointed_minimal_M(phi_z, 0, 1) == 1


def test_transfer_constant_formulas() -> None:
    assert transfer_constants_forward(F(1), F(1), F(1), F(0)) == _constants(2, 1)
    assert sound_forward_constants(F(1), F(1), F(1), F(0)) == _constants(2, 2)
    assert transfer_constants_backward(F(1), F(3)) == _constants(2, 3)
    with pytest.raises(DomainError):
        transfer_constants_backward(F(1, 2), F(0))


def test_transfer_check_on_the_grid(phi_z: Section, phi_id: Section) -> None:
    """Test both directions of the constant transfer."""
    check = constant_transfer_check(phi_z, phi_id, 0, _constants(1, 0), _constants(1, 1))

    assert check.forward_hypothesis
    assert (check.forward_constants.L, check.forward_constants.M) == (2, 1)
    assert check.forward_holds
    assert (check.literal_constants.L, check.literal_constants.M) == (2, 1)
    assert check.literal_holds
    assert (check.pointed_constants.L, check.pointed_constants.M) == (1, 1)
    assert (check.backward_constants.L, check.backward_constants.M) == (2, 1)
    assert check.backward_holds


def test_literal_forward_constants_fail_with_positive_M() -> None:
    """Test that the unscaled forward constant can fail when M > 0."""
    fibration = _line_instance()
    phi0 = Section(fibration=fibration, choice={0: "x0", 1: "p"})
    phi = Section(fibration=fibration, choice={0: "x0", 1: "q"})
    assert is_qi_section(phi0, _constants(1, 1))
    assert is_relative_qi(phi, phi0, 0, _constants(1, 0))

    check = constant_transfer_check(phi, phi0, 0, _constants(1, 1), _constants(1, 0))

    assert (check.forward_constants.L, check.forward_constants.M) == (2, 2)
    assert check.forward_holds
    assert (check.literal_constants.L, check.literal_constants.M) == (2, 1)
    assert not check.literal_holds
    assert (check.pointed_constants.L, check.pointed_constants.M) == (1, 3)
    assert (check.backward_constants.L, check.backward_constants.M) == (2, 3)
    assert check.backward_holds


def test_transfer_check_requires_valid_reference_constants(
    phi_z: Section, phi_id: Section
) -> None:
    with pytest.raises(PreconditionError, match="reference"):
        constant_transfer_check(phi_id, phi_z, 0, _constants(1, 0), _constants(1, 1))


def test_global_equivalence_on_the_grid(g1: Fibration, phi_z: Section) -> None:
    """Test relative and intrinsic QI agree over the row family."""
    report = global_equivalence_check(phi_z, row_family(g1), _constants(1, 0))

    assert report.verdict
    assert report.relative_statement and report.intrinsic_statement
    assert [(p.relative_constants.L, p.relative_constants.M) for p in report.points] == [
        (1, 1)
    ] * 3
    assert (report.derived_intrinsic_constants.L, report.derived_intrinsic_constants.M) == (2, 1)
    assert (report.intrinsic_constants.L, report.intrinsic_constants.M) == (1, 1)
    assert (report.derived_relative_constants.L, report.derived_relative_constants.M) == (2, 1)


def test_global_equivalence_threads_do_not_change_the_report(
    g1: Fibration, phi_z: Section
) -> None:
    family = row_family(g1)
    serial = global_equivalence_check(phi_z, family, _constants(1, 0))
    threaded = global_equivalence_check(phi_z, family, _constants(1, 0), threads=4)

    assert serial == threaded


def test_global_equivalence_needs_a_section_through_every_graph_point(
    g1: Fibration, phi_z: Section, phi_id: Section
) -> None:
    family = {x: phi_id for x in g1.space.points}

    with pytest.raises(PreconditionError, match="does not pass through"):
        global_equivalence_check(phi_z, family, _constants(1, 0))


def test_strong_relation(phi_id: Section, phi_z: Section, phi_w: Section) -> None:
    """Test the strong relation on three sections through (0, 0)."""
    report = strong_relation_check([phi_id, phi_z, phi_w], 0)

    assert report.verdict
    assert report.reflexive and report.symmetric and report.transitive
    assert len(report.pairs) == 9
    assert len(report.chains) == 6
    pair = next(p for p in report.pairs if (p.first, p.second) == (0, 1))
    assert (pair.constants.L, pair.constants.M) == (1, 1)
    assert all(p.constants.M == 0 for p in report.pairs if p.first == p.second)


def test_strong_relation_needs_sections(phi_id: Section) -> None:
    with pytest.raises(PreconditionError):
        strong_relation_check([], 0)


def test_strong_relation_records_the_min_L_chain_constant(
    phi_id: Section, phi_z: Section, phi_w: Section
) -> None:
    """Test the chain constant built from each pair's own (L_ij, 0)."""
    report = strong_relation_check([phi_id, phi_z, phi_w], 0)
    chains = {(c.first, c.middle, c.last): c for c in report.chains}

    # id ~ z flattens at L = 2, z ~ w and id ~ w already at L = 1
    through_z = chains[0, 1, 2]
    assert (through_z.proof_constants.L, through_z.proof_constants.M) == (1, 0)
    assert through_z.proof_constants_suffice

    through_w = chains[0, 2, 1]
    assert (through_w.proof_constants.L, through_w.proof_constants.M) == (1, 0)
    assert not through_w.proof_constants_suffice
    assert report.transitive
