"""Tests for linear fibrations: fiber distances, QI on the grid and the section algebra."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from isec.core.errors import DomainError, PreconditionError
from isec.domain.constants import QIConstants
from isec.domain.linear import LinearFibration, LinearSection
from isec.services.generators import linear_instance
from isec.services.linear_structure import (
    convex_combination,
    dist_to_affine_fiber,
    is_linear_relative_qi,
    linear_is_qi,
    linear_minimal_M,
    linear_relative_minimal_M,
    scalar_multiple,
    scaled_fiber_identity_holds,
    section_sum,
    sum_membership_constants,
    verify_bounded_fiber_sum,
    verify_convexity,
    verify_scalar_membership,
    verify_scalar_qi,
    verify_sum_membership,
)

GRID = [[0], [1], [2]]


def _plane(norm: str = "l2", fiber_radius: float | None = None) -> LinearFibration:
    """R^2 -> R, (x1, x2) -> x1, sampled at y = 0, 1, 2."""
    return linear_instance([[1, 0]], grid=GRID, norm=norm, fiber_radius=fiber_radius)


def _section(fibration: LinearFibration, heights) -> LinearSection:
    vectors = [(fibration.scale * y[0], h) for y, h in zip(GRID, heights)]
    return LinearSection.from_array(fibration, np.asarray(vectors))


def test_scaled_quotient_map() -> None:
    fibration = linear_instance([[1, 1]], grid=[[0], [1]], scale=2.0)

    point = fibration.base_point(np.array([1.0]))

    assert np.allclose(point, [1.0, 1.0])
    assert np.allclose(fibration.project(point), [1.0])


def test_l2_distance_to_a_line() -> None:
    fibration = _plane()

    assert dist_to_affine_fiber(np.array([0.0, 3.0]), np.array([0.0]), fibration) == pytest.approx(0)
    assert dist_to_affine_fiber(np.array([2.0, 3.0]), np.array([0.0]), fibration) == pytest.approx(2)


@pytest.mark.parametrize(("norm", "expected"), [("l2", math.sqrt(2)), ("l1", 2.0), ("linf", 1.0)])
def test_distance_to_a_diagonal_fiber(norm: str, expected: float) -> None:
    fibration = linear_instance([[1, 1]], grid=[[0]], norm=norm)

    value = dist_to_affine_fiber(np.array([1.0, 1.0]), np.array([0.0]), fibration)

    assert value == pytest.approx(expected, abs=1e-8)


def test_distance_to_a_bounded_fiber() -> None:
    fibration = _plane(fiber_radius=1.0)

    assert dist_to_affine_fiber(np.array([0.0, 3.0]), np.array([0.0]), fibration) == pytest.approx(2)
    assert dist_to_affine_fiber(np.array([2.0, 3.0]), np.array([0.0]), fibration) == pytest.approx(
        2 * math.sqrt(2)
    )
    assert fibration.fiber_diameter() == 2.0
    assert fibration.with_scale(3.0).fiber_diameter() == 6.0


def test_unbounded_fibers_have_infinite_diameter() -> None:
    assert math.isinf(_plane().fiber_diameter())


def test_rank_deficient_map_rejected() -> None:
    with pytest.raises(ValidationError, match="full row rank"):
        LinearFibration(A=((1.0, 0.0), (2.0, 0.0)), y_grid=((0.0, 0.0),))


def test_bounded_fibers_need_l2() -> None:
    with pytest.raises(ValidationError, match="l2 norm only"):
        _plane(norm="l1", fiber_radius=1.0)


def test_zero_scale_rejected() -> None:
    with pytest.raises(ValidationError, match="nonzero"):
        linear_instance([[1, 0]], grid=GRID, scale=0.0)


def test_section_must_lie_in_its_fibers() -> None:
    with pytest.raises(ValidationError, match="does not lie in the fiber"):
        LinearSection(fibration=_plane(), choice=((0.0, 0.0), (1.5, 0.0), (2.0, 0.0)))


def test_flat_section_is_isometric() -> None:
    section = _section(_plane(), [0, 0, 0])

    assert linear_minimal_M(section, 1.0) == pytest.approx(0)
    assert linear_is_qi(section, QIConstants(L=1, M=0))
    assert linear_minimal_M(section, 2.0) == pytest.approx(0)


def test_zigzag_section_constants() -> None:
    section = _section(_plane(), [0, 2, 0])

    assert linear_minimal_M(section, 1.0) == pytest.approx(math.sqrt(5) - 1)
    assert not linear_is_qi(section, QIConstants(L=1, M=1))
    with pytest.raises(DomainError):
        linear_minimal_M(section, 0.5)


def test_linear_relative_constants() -> None:
    fibration = _plane()
    psi = _section(fibration, [0, 0, 0])
    phi = _section(fibration, [0, 2, 0])

    assert linear_relative_minimal_M(phi, psi, 0, 1.0) == pytest.approx(1)
    assert is_linear_relative_qi(phi, psi, 0, QIConstants(L=1, M=1))
    with pytest.raises(PreconditionError, match="differ at base index 1"):
        linear_relative_minimal_M(phi, psi, 1, 1.0)


def test_convex_combination_stays_in_the_fibers() -> None:
    fibration = _plane()
    w = convex_combination(_section(fibration, [0, 2, 0]), _section(fibration, [0, 0, 0]), 0.5)

    assert np.allclose(w.vectors, [[0, 0], [1, 1], [2, 0]])
    with pytest.raises(DomainError):
        convex_combination(w, w, 1.5)


def test_sum_and_scalar_multiple_rescale_the_quotient() -> None:
    fibration = _plane()
    phi = _section(fibration, [0, 2, 0])

    assert section_sum(phi, phi).fibration.scale == 2.0
    assert scalar_multiple(-3.0, phi).fibration.scale == -3.0
    with pytest.raises(PreconditionError, match="mismatched scale"):
        section_sum(phi, scalar_multiple(2.0, phi))
    with pytest.raises(DomainError):
        scalar_multiple(0.0, phi)


def test_verify_convexity() -> None:
    fibration = _plane()
    psi = _section(fibration, [0, 0, 0])
    phi = _section(fibration, [0, 2, 0])

    check = verify_convexity(phi, psi, psi, 0, 0.5, QIConstants(L=1, M=1), QIConstants(L=1, M=0))

    assert check.holds
    assert check.constants.M == pytest.approx(1)
    assert check.found_M == pytest.approx(0)


def test_verify_convexity_rejects_wrong_constants() -> None:
    fibration = _plane()
    psi = _section(fibration, [0, 0, 0])
    phi = _section(fibration, [0, 2, 0])

    with pytest.raises(PreconditionError, match="phi is not relative QI"):
        verify_convexity(phi, psi, psi, 0, 0.5, QIConstants(L=1, M=0), QIConstants(L=1, M=0))


def test_sum_membership_constants_formula() -> None:
    constants = sum_membership_constants(1.0, QIConstants(L=2, M=1), 3.0, QIConstants(L=4, M=2))

    assert constants.L == pytest.approx(3.5)
    assert constants.M == pytest.approx(3)
    with pytest.raises(DomainError):
        sum_membership_constants(1.0, constants, -1.0, constants)


def test_verify_sum_membership() -> None:
    fibration = _plane()
    psi = _section(fibration, [0, 0, 0])
    phi = _section(fibration, [0, 2, 0])

    check = verify_sum_membership(
        phi, psi, psi, 0, 1.0, 1.0, QIConstants(L=1, M=1), QIConstants(L=1, M=0)
    )

    assert check.holds
    assert "scale 2.0" in check.detail


@pytest.mark.parametrize("beta", [-2.0, 0.5, 3.0])
def test_verify_scalar_membership_and_qi(beta: float) -> None:
    fibration = _plane()
    psi = _section(fibration, [0, 0, 0])
    phi = _section(fibration, [0, 2, 0])
    constants = QIConstants(L=1, M=float(linear_minimal_M(phi, 1.0)))

    membership = verify_scalar_membership(phi, psi, 0, 1.0, beta, QIConstants(L=1, M=1))
    qi = verify_scalar_qi(beta, phi, constants)

    assert membership.holds
    assert membership.constants.M == pytest.approx(abs(beta))
    assert qi.holds


def test_verify_bounded_fiber_sum() -> None:
    fibration = _plane(fiber_radius=1.0)
    phi = _section(fibration, [1, -1, 1])
    eta = _section(fibration, [0, 0, 0])

    check = verify_bounded_fiber_sum(phi, eta)

    assert check.holds
    assert check.constants.M == pytest.approx(4)


def test_bounded_fiber_sum_needs_bounded_fibers() -> None:
    phi = _section(_plane(), [0, 0, 0])

    with pytest.raises(PreconditionError, match="unbounded"):
        verify_bounded_fiber_sum(phi, phi)


@pytest.mark.parametrize("lam", [3.0, -0.5])
def test_scaled_fiber_identity(lam: float) -> None:
    assert scaled_fiber_identity_holds(linear_instance([[1, 1, 0]], grid=GRID, norm="l1"), lam)
    assert scaled_fiber_identity_holds(_plane(), lam)


def test_scaled_fiber_identity_excludes_bounded_fibers() -> None:
    with pytest.raises(PreconditionError):
        scaled_fiber_identity_holds(_plane(fiber_radius=1.0), 2.0)
