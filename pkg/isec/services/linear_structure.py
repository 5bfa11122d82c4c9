"""Sections of linear quotient maps: fiber distances, convexity and closure.

Sums and scalar multiples change the quotient a section belongs to: the sum
of two sections of (1/s)·π is a section of (1/2s)·π and beta·phi is a section
of (1/(beta·s))·π. Every operation here returns a section validated against
its rescaled fibration.
"""

from __future__ import annotations

import logging
import math
from typing import Tuple

import numpy as np
from scipy.optimize import linprog

from isec.core.errors import ConsistencyError, DomainError, PreconditionError
from isec.domain.constants import QIConstants
from isec.domain.linear import LinearFibration, LinearSection
from isec.domain.reports import AlgebraCheck, ConstantsReport

logger = logging.getLogger(__name__)

# Slack for inequality checks on the (always float) linear model.
LINEAR_TOLERANCE = 1e-9


def dist_to_affine_fiber(x: np.ndarray, y: np.ndarray, fibration: LinearFibration) -> float:
    """d(x, fiber over y) for the fibration's norm and scale."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if fibration.norm_kind == "l2":
        residual = fibration.matrix @ x - fibration.scale * y
        across = float(np.linalg.norm(fibration.pinv @ residual))
        radius = fibration.radius
        if radius is None:
            return across
        along = max(0.0, float(np.linalg.norm(fibration.null_component(x))) - radius)
        return math.hypot(across, along)
    return _lp_fiber_distance(x, y, fibration)


def _lp_fiber_distance(x: np.ndarray, y: np.ndarray, fibration: LinearFibration) -> float:
    """min over z of ||x - x0 - N z|| for l1 or linf, as a linear program."""
    offset = x - fibration.base_point(y)
    basis = fibration.null_basis
    n, p = basis.shape
    if p == 0:
        return fibration.norm(offset)
    if fibration.norm_kind == "l1":
        # variables (z, t): minimize sum t with |offset - N z| <= t
        cost = np.concatenate([np.zeros(p), np.ones(n)])
        identity = np.identity(n)
        A_ub = np.concatenate(
            [
                np.concatenate([-basis, -identity], 1),
                np.concatenate([basis, -identity], 1),
            ],
            0,
        )
        bounds = [(None, None)] * p + [(0, None)] * n
    else:
        # variables (z, s): minimize s with |offset - N z| <= s componentwise
        cost = np.concatenate([np.zeros(p), np.ones(1)])
        ones = np.ones((n, 1))
        A_ub = np.concatenate(
            [
                np.concatenate([-basis, -ones], 1),
                np.concatenate([basis, -ones], 1),
            ],
            0,
        )
        bounds = [(None, None)] * p + [(0, None)]
    b_ub = np.concatenate([-offset, offset])
    result = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not result.success:
        raise ConsistencyError(f"fiber distance program failed: {result.message}")
    return max(0.0, float(result.fun))


# --- QI on the sampled grid ----------------------------------------------------


def linear_pair_tables(section: LinearSection) -> Tuple[np.ndarray, np.ndarray]:
    """a[i, j] = ||phi(y_i) - phi(y_j)||, b[i, j] = d(phi(y_i), fiber over y_j)."""
    fibration = section.fibration
    vectors = section.vectors
    size = len(vectors)
    a = np.zeros((size, size))
    b = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            a[i, j] = fibration.norm(vectors[i] - vectors[j])
            b[i, j] = 0.0 if i == j else dist_to_affine_fiber(vectors[i], fibration.grid[j], fibration)
    return a, b


def linear_minimal_M(section: LinearSection, L: float) -> float:
    """M*(L) over the sampled grid."""
    if L < 1:
        raise DomainError(f"L must be at least 1, got {L}")
    a, b = linear_pair_tables(section)
    return max(0.0, float((a - L * b).max()))


def linear_is_qi(section: LinearSection, constants: QIConstants) -> bool:
    """(L, M)-QI on the sampled grid, up to the linear tolerance."""
    return linear_minimal_M(section, float(constants.L)) <= float(constants.M) + LINEAR_TOLERANCE


def _require_same_map(phi: LinearSection, psi: LinearSection) -> None:
    f, g = phi.fibration, psi.fibration
    if (f.A, f.norm_kind, f.y_grid, f.fiber_radius) != (g.A, g.norm_kind, g.y_grid, g.fiber_radius):
        raise PreconditionError("the sections belong to different linear maps")


def _relative_tables(
    phi: LinearSection, psi: LinearSection, base: int
) -> Tuple[np.ndarray, np.ndarray]:
    _require_same_map(phi, psi)
    if not 0 <= base < len(phi.vectors):
        raise PreconditionError(f"base index {base} is outside the grid")
    if not np.allclose(phi.vectors[base], psi.vectors[base], rtol=0.0, atol=1e-10):
        raise PreconditionError(f"sections differ at base index {base}")
    norm = phi.fibration.norm
    a = np.array([norm(u - v) for u, v in zip(phi.vectors, psi.vectors)])
    b = np.array([norm(psi.vectors[base] - v) for v in psi.vectors])
    return a, b


def linear_relative_minimal_M(phi: LinearSection, psi: LinearSection, base: int, L: float) -> float:
    """Smallest M with ||phi(y) - psi(y)|| <= L·||psi(y_hat) - psi(y)|| + M on the grid."""
    if L < 1:
        raise DomainError(f"L must be at least 1, got {L}")
    a, b = _relative_tables(phi, psi, base)
    return max(0.0, float((a - L * b).max()))


def is_linear_relative_qi(
    phi: LinearSection, psi: LinearSection, base: int, constants: QIConstants
) -> bool:
    found = linear_relative_minimal_M(phi, psi, base, float(constants.L))
    return found <= float(constants.M) + LINEAR_TOLERANCE


# --- algebra of sections -------------------------------------------------------


def convex_combination(phi: LinearSection, eta: LinearSection, t: float) -> LinearSection:
    """t·phi + (1 - t)·eta, a section of the same quotient."""
    if not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    _require_same_map(phi, eta)
    if phi.fibration.scale != eta.fibration.scale:
        raise PreconditionError("the sections belong to different scaled quotients")
    return LinearSection.from_array(phi.fibration, t * phi.vectors + (1 - t) * eta.vectors)


def section_sum(
    phi: LinearSection, eta: LinearSection, allow_mixed_scales: bool = False
) -> LinearSection:
    """phi + eta as a section of the quotient with scale s_phi + s_eta."""
    _require_same_map(phi, eta)
    s1, s2 = phi.fibration.scale, eta.fibration.scale
    if s1 != s2 and not allow_mixed_scales:
        raise PreconditionError(f"mismatched scale: {s1} != {s2}")
    total = s1 + s2
    if total == 0:
        raise DomainError("the scales cancel; the sum is not a section of any quotient")
    if phi.fibration.fiber_radius is not None and s1 * s2 < 0:
        raise PreconditionError("bounded fibers only add up for scales of one sign")
    return LinearSection.from_array(phi.fibration.with_scale(total), phi.vectors + eta.vectors)


def scalar_multiple(beta: float, phi: LinearSection) -> LinearSection:
    """beta·phi as a section of the quotient with scale beta·s."""
    if beta == 0:
        raise DomainError("beta must be nonzero")
    return LinearSection.from_array(
        phi.fibration.with_scale(beta * phi.fibration.scale), beta * phi.vectors
    )


def convexity_constants(t: float, c_phi: QIConstants, c_eta: QIConstants) -> QIConstants:
    """(t(L_phi - L_eta) + L_eta, M_phi + M_eta)."""
    if not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    L = t * (float(c_phi.L) - float(c_eta.L)) + float(c_eta.L)
    return QIConstants(L=max(1.0, L), M=float(c_phi.M) + float(c_eta.M))


def sum_membership_constants(
    delta1: float, c1: QIConstants, delta2: float, c2: QIConstants
) -> QIConstants:
    """Constants of phi + eta in I_{(d1+d2)psi} from phi in I_{d1 psi}, eta in I_{d2 psi}.

    ((|d1| L1 + |d2| L2) / |d1 + d2|, M1 + M2), which is the weighted mean of
    L1 and L2 for positive d1, d2.
    """
    if delta1 == 0 or delta2 == 0:
        raise DomainError("scaling factors must be nonzero")
    if delta1 + delta2 == 0:
        raise DomainError("scaling factors cancel")
    L = (abs(delta1) * float(c1.L) + abs(delta2) * float(c2.L)) / abs(delta1 + delta2)
    return QIConstants(L=L, M=float(c1.M) + float(c2.M))


def scalar_membership_constants(beta: float, constants: QIConstants) -> QIConstants:
    """(L, |beta|·M) for beta·phi in I_{beta·delta·psi}."""
    if beta == 0:
        raise DomainError("beta must be nonzero")
    return QIConstants(L=float(constants.L), M=abs(beta) * float(constants.M))


def _require_member(
    phi: LinearSection, reference: LinearSection, base: int, constants: QIConstants, name: str
) -> None:
    if phi.fibration.scale != reference.fibration.scale:
        raise PreconditionError(f"{name} is not a section of the reference's scaled quotient")
    if not is_linear_relative_qi(phi, reference, base, constants):
        raise PreconditionError(f"{name} is not relative QI with the stated constants")


def verify_convexity(
    phi: LinearSection,
    eta: LinearSection,
    psi: LinearSection,
    base: int,
    t: float,
    c_phi: QIConstants,
    c_eta: QIConstants,
) -> AlgebraCheck:
    """t·phi + (1-t)·eta is relative QI to psi with the predicted constants."""
    _require_member(phi, psi, base, c_phi, "phi")
    _require_member(eta, psi, base, c_eta, "eta")
    w = convex_combination(phi, eta, t)
    predicted = convexity_constants(t, c_phi, c_eta)
    found = linear_relative_minimal_M(w, psi, base, float(predicted.L))
    return AlgebraCheck(
        name="convexity",
        holds=found <= float(predicted.M) + LINEAR_TOLERANCE,
        constants=ConstantsReport.of(predicted),
        found_M=found,
        detail=f"t={t}",
    )


def verify_sum_membership(
    phi: LinearSection,
    eta: LinearSection,
    psi: LinearSection,
    base: int,
    delta1: float,
    delta2: float,
    c1: QIConstants,
    c2: QIConstants,
) -> AlgebraCheck:
    """phi in I_{d1 psi} and eta in I_{d2 psi} put phi + eta in I_{(d1+d2) psi}."""
    _require_member(phi, scalar_multiple(delta1, psi), base, c1, "phi")
    _require_member(eta, scalar_multiple(delta2, psi), base, c2, "eta")
    w = section_sum(phi, eta, allow_mixed_scales=True)
    target = scalar_multiple(delta1 + delta2, psi)
    predicted = sum_membership_constants(delta1, c1, delta2, c2)
    found = linear_relative_minimal_M(w, target, base, float(predicted.L))
    return AlgebraCheck(
        name="sum_membership",
        holds=found <= float(predicted.M) + LINEAR_TOLERANCE,
        constants=ConstantsReport.of(predicted),
        found_M=found,
        detail=f"delta1={delta1}, delta2={delta2}; sum is a section of scale {w.fibration.scale}",
    )


def verify_scalar_membership(
    phi: LinearSection,
    psi: LinearSection,
    base: int,
    delta: float,
    beta: float,
    constants: QIConstants,
) -> AlgebraCheck:
    """phi in I_{delta psi} puts beta·phi in I_{beta delta psi} with (L, |beta| M)."""
    _require_member(phi, scalar_multiple(delta, psi), base, constants, "phi")
    scaled = scalar_multiple(beta, phi)
    target = scalar_multiple(beta * delta, psi)
    predicted = scalar_membership_constants(beta, constants)
    found = linear_relative_minimal_M(scaled, target, base, float(predicted.L))
    return AlgebraCheck(
        name="scalar_membership",
        holds=found <= float(predicted.M) + LINEAR_TOLERANCE,
        constants=ConstantsReport.of(predicted),
        found_M=found,
        detail=f"beta={beta}, delta={delta}",
    )


def verify_scalar_qi(beta: float, phi: LinearSection, constants: QIConstants) -> AlgebraCheck:
    """beta·phi is QI for the beta-scaled quotient with (L, |beta|·M)."""
    if not linear_is_qi(phi, constants):
        raise PreconditionError("phi is not QI with the stated constants")
    scaled = scalar_multiple(beta, phi)
    predicted = scalar_membership_constants(beta, constants)
    found = linear_minimal_M(scaled, float(predicted.L))
    return AlgebraCheck(
        name="scalar_qi",
        holds=found <= float(predicted.M) + LINEAR_TOLERANCE,
        constants=ConstantsReport.of(predicted),
        found_M=found,
        detail=f"beta={beta}",
    )


def verify_bounded_fiber_sum(phi: LinearSection, eta: LinearSection) -> AlgebraCheck:
    """With fibers of diameter ell, phi + eta is (1, 2·ell)-QI for the half-scaled quotient."""
    ell = phi.fibration.fiber_diameter()
    if not math.isfinite(ell):
        raise PreconditionError("fibers are unbounded; the sum bound needs a fiber radius")
    w = section_sum(phi, eta)
    found = linear_minimal_M(w, 1.0)
    predicted = QIConstants(L=1.0, M=2.0 * ell)
    return AlgebraCheck(
        name="bounded_fiber_sum",
        holds=found <= 2.0 * ell + LINEAR_TOLERANCE,
        constants=ConstantsReport.of(predicted),
        found_M=found,
        detail=f"ell={ell}",
    )


def scaled_fiber_identity_holds(fibration: LinearFibration, lam: float) -> bool:
    """The fiber over y of (1/lam)·π equals π^-1(lam·y), on points sampled near every fiber.

    Membership and distances are compared; bounded fibers are excluded since
    their truncation radius follows the scale.
    """
    if lam == 0:
        raise DomainError("lam must be nonzero")
    if fibration.fiber_radius is not None:
        raise PreconditionError("the fiber identity concerns unbounded fibers")
    scaled = fibration.with_scale(lam)
    unit = fibration.with_scale(1.0)
    basis = fibration.null_basis
    offsets = [np.zeros(fibration.ambient_dim)]
    offsets += [basis[:, c] for c in range(basis.shape[1])]
    offsets += [fibration.pinv[:, r] for r in range(fibration.target_dim)]
    for y in fibration.grid:
        anchor = scaled.base_point(y)
        for offset in offsets:
            x = anchor + offset
            if scaled.contains(x, y) != unit.contains(x, lam * y):
                logger.warning("fiber membership differs at y=%s", y)
                return False
            gap = abs(dist_to_affine_fiber(x, y, scaled) - dist_to_affine_fiber(x, lam * y, unit))
            if gap > 1e-10 * max(1.0, abs(lam)):
                logger.warning("fiber distance differs at y=%s by %s", y, gap)
                return False
    return True
