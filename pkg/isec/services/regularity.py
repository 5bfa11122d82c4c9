"""Large-scale Ahlfors-David regularity of section graphs and its transfer.

All radius-indexed claims are checked on a declared finite grid of radii
strictly above r0. Labels are weighted by the fibration's measure, or by
counting measure when it has none.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.stats import linregress

from isec.core.errors import DomainError, PreconditionError
from isec.core.numeric import Real, leq
from isec.core.parallel import parallel_map
from isec.domain.constants import Infeasible, QIConstants
from isec.domain.fibration import Fibration, Label, Section
from isec.domain.metric import Point
from isec.domain.reports import (
    ConstantsReport,
    InclusionFailure,
    InclusionReport,
    RadiusVerdict,
    RegularityReport,
    RegularityTransferReport,
    TransferMargin,
)
from isec.services.fibration import mass_of, projected_mass
from isec.services.qi_analysis import is_qi_section, pair_tables

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegularityEstimate:
    """Tightest c1, c2 with c1·r^Q <= mass <= c2·r^Q on the grid."""

    c1: Real
    c2: Real
    lower_witness: Tuple[Label, Real]
    upper_witness: Tuple[Label, Real]
    masses: Tuple[Tuple[Real, ...], ...]


def measured(fibration: Fibration) -> Fibration:
    """The fibration itself, or with counting measure when it carries none."""
    if fibration.measure is not None:
        return fibration
    logger.info("no measure given; using counting measure on %s labels", len(fibration.labels))
    return fibration.with_counting_measure()


def measured_section(section: Section) -> Section:
    fibration = measured(section.fibration)
    if fibration is section.fibration:
        return section
    return Section(fibration=fibration, choice=section.choice)


def radius_grid(fibration: Fibration, r0: object, r_grid: Sequence[object]) -> List[Real]:
    """Radii in the instance's arithmetic, all strictly above r0."""
    space = fibration.space
    r0 = space.coerce(r0)
    radii = [space.coerce(r) for r in r_grid]
    if not radii:
        raise DomainError("the radius grid is empty")
    for r in radii:
        if r <= r0:
            raise DomainError(f"radius {r} does not exceed r0 = {r0}")
    return radii


def _homogeneity(
    fibration: Fibration, radii: Sequence[Real], threads: int = 1
) -> Tuple[Union[Real, Infeasible], Tuple[Point, Point, Real] | None]:
    fibration = measured(fibration)
    space = fibration.space

    def masses_at(r: Real) -> List[Real]:
        return [projected_mass(fibration, i, r) for i in range(space.size)]

    per_radius = parallel_map(masses_at, radii, threads)
    best: Real = space.coerce(1)
    witness: Tuple[Point, Point, Real] | None = None
    for r, masses in zip(radii, per_radius):
        for j, label in enumerate(fibration.labels):
            members = fibration.fiber_indices(j)
            for p in members:
                for q in members:
                    if p == q:
                        continue
                    if masses[q] == 0:
                        if masses[p] > 0:
                            x, x_prime = space.points[p], space.points[q]
                            logger.warning("ball around %s projects to measure 0 at r=%s", x_prime, r)
                            return (
                                Infeasible(
                                    reason=f"mu(pi(B({x_prime!r}, {r}))) = 0 while "
                                    f"mu(pi(B({x!r}, {r}))) > 0",
                                    witness=(label,),
                                ),
                                (x, x_prime, r),
                            )
                        continue
                    ratio = masses[p] / masses[q]
                    if ratio > best:
                        best, witness = ratio, (space.points[p], space.points[q], r)
    return best, witness


def homogeneity_constant(
    fibration: Fibration, r0: object, r_grid: Sequence[object], threads: int = 1
) -> Union[Real, Infeasible]:
    """Smallest C with mu(pi(B(x, r))) <= C·mu(pi(B(x', r))) for x, x' in one fiber.

    Both orders of every pair are scanned, so the bound is symmetric.
    """
    radii = radius_grid(fibration, r0, r_grid)
    value, _ = _homogeneity(fibration, radii, threads)
    return value


def ball_inclusion_check(
    section: Section, constants: QIConstants, r_grid: Sequence[object]
) -> InclusionReport:
    """pi(B(p, r/L)) ⊆ pi(B(p, r+M) ∩ phi(Y)) ⊆ pi(B(p, r+M)) for p in the graph."""
    if not is_qi_section(section, constants):
        raise PreconditionError("the section is not QI with the given constants")
    space = section.space
    fibration = section.fibration
    L, M = space.coerce(constants.L), space.coerce(constants.M)
    radii = [space.coerce(r) for r in r_grid]
    if any(r <= 0 for r in radii):
        raise DomainError("radii must be positive")
    a, _ = pair_tables(section)
    table = fibration.fiber_distances()
    labels = fibration.labels
    failures: List[InclusionFailure] = []
    for row, center in enumerate(labels):
        p = section.indices[row]
        for r in radii:
            inner = np.asarray(table[p] < r / L, dtype=bool)
            middle = np.asarray(a[row] < r + M, dtype=bool)
            outer = np.asarray(table[p] < r + M, dtype=bool)
            for j in np.flatnonzero(inner & ~middle):
                failures.append(InclusionFailure(center=center, r=r, inclusion="inner", label=labels[j]))
            for j in np.flatnonzero(middle & ~outer):
                failures.append(InclusionFailure(center=center, r=r, inclusion="outer", label=labels[j]))
    if failures:
        logger.error("ball inclusions failed for a validated section: %s failures", len(failures))
    return InclusionReport(
        subcommand="inclusion",
        verdict=not failures,
        constants=ConstantsReport.of(constants),
        r_grid=radii,
        failures=failures,
    )


def graph_masses(section: Section, radii: Sequence[Real]) -> List[List[Real]]:
    """masses[k][i] = phi_* mu(B(phi(y_i), r_k) ∩ phi(Y))."""
    section = measured_section(section)
    weights = section.fibration.weights()
    zero = section.space.coerce(0)
    a, _ = pair_tables(section)
    return [[mass_of(weights, a[i] < r, zero) for i in range(a.shape[0])] for r in radii]


def ad_regularity_estimate(
    section: Section, Q: object, r0: object, r_grid: Sequence[object]
) -> RegularityEstimate:
    """Tightest (c1, c2) with c1·r^Q <= phi_* mu(B(phi(y), r) ∩ phi(Y)) <= c2·r^Q."""
    space = section.space
    Q = space.coerce(Q)
    if Q <= 0:
        raise DomainError(f"Q must be positive, got {Q}")
    radii = radius_grid(section.fibration, r0, r_grid)
    masses = graph_masses(section, radii)
    labels = section.fibration.labels
    c1 = c2 = None
    lower_witness = upper_witness = None
    for r, row in zip(radii, masses):
        scale = r**Q
        for i, mass in enumerate(row):
            value = mass / scale
            if c1 is None or value < c1:
                c1, lower_witness = value, (labels[i], r)
            if c2 is None or value > c2:
                c2, upper_witness = value, (labels[i], r)
    if c1 == 0:
        logger.warning("zero graph mass at label %s, r=%s", *lower_witness)  # type: ignore[misc]
    return RegularityEstimate(
        c1=c1,  # type: ignore[arg-type]
        c2=c2,  # type: ignore[arg-type]
        lower_witness=lower_witness,  # type: ignore[arg-type]
        upper_witness=upper_witness,  # type: ignore[arg-type]
        masses=tuple(tuple(row) for row in masses),
    )


def derived_constants(c1: Real, c2: Real, C: Real, L: Real, Q: Real) -> Tuple[Real, Real]:
    """c3 = c1 / (C·L^Q) and c4 = c2·C·L^Q."""
    growth = C * L**Q
    return c1 / growth, c2 * growth


def fitted_exponent(radii: Sequence[Real], masses: Sequence[Sequence[Real]]) -> float | None:
    """Least-squares slope of log(mean mass) against log(r); diagnostic only."""
    xs, ys = [], []
    for r, row in zip(radii, masses):
        mean = float(sum(float(m) for m in row)) / len(row)
        if mean > 0:
            xs.append(math.log(float(r)))
            ys.append(math.log(mean))
    if len(set(xs)) < 2:
        return None
    return float(linregress(xs, ys).slope)


def build_regularity_report(
    section: Section,
    constants: QIConstants,
    Q: object,
    r0: object,
    r_grid: Sequence[object],
    threads: int = 1,
) -> RegularityReport:
    """Regularity data of an (L, M)-QI section, ready for transfer."""
    if not is_qi_section(section, constants):
        raise PreconditionError("the section is not QI with the given constants")
    space = section.space
    radii = radius_grid(section.fibration, r0, r_grid)
    estimate = ad_regularity_estimate(section, Q, r0, r_grid)
    C, C_witness = _homogeneity(section.fibration, radii, threads)
    L, M, Q = space.coerce(constants.L), space.coerce(constants.M), space.coerce(Q)
    if isinstance(C, Infeasible):
        c3 = c4 = None
        C_value, C_infeasible = None, C.reason
    else:
        c3, c4 = derived_constants(estimate.c1, estimate.c2, C, L, Q)
        C_value, C_infeasible = C, None
    verdicts = [
        RadiusVerdict(r=r, min_mass=min(row), max_mass=max(row), holds=min(row) > 0)
        for r, row in zip(radii, estimate.masses)
    ]
    return RegularityReport(
        Q=Q,
        r0=space.coerce(r0),
        r_grid=radii,
        L=L,
        M=M,
        C=C_value,
        C_infeasible=C_infeasible,
        C_witness=C_witness,
        c1=estimate.c1,
        c2=estimate.c2,
        c3=c3,
        c4=c4,
        lower_witness=estimate.lower_witness,
        upper_witness=estimate.upper_witness,
        fitted_Q=fitted_exponent(radii, estimate.masses),
        verdicts=verdicts,
    )


def transfer_regularity(
    section: Section,
    report: RegularityReport,
    L: object,
    M: object,
    r_grid: Sequence[object],
    threads: int = 1,
) -> RegularityTransferReport:
    """Check c3·(r-M)^Q <= psi_* mu(B(psi(y), r) ∩ psi(Y)) <= c4·(r+M)^Q.

    ``report`` must have been built for constants dominated by (L, M); c3 and c4
    are recomputed with this L. Radii r <= M make the lower bound vacuous.
    """
    space = section.space
    L, M = space.coerce(L), space.coerce(M)
    constants = QIConstants(L=L, M=M)
    if report.L > L or report.M > M:
        raise PreconditionError("the regularity report was built for larger constants")
    if report.C is None:
        raise PreconditionError(f"no homogeneity constant: {report.C_infeasible}")
    if not is_qi_section(section, constants):
        raise PreconditionError("the section is not QI with the given constants")
    radii = radius_grid(section.fibration, report.r0, r_grid)
    own_C, _ = _homogeneity(section.fibration, radii, threads)
    tol = space.comparison_tolerance
    if isinstance(own_C, Infeasible) or not leq(own_C, report.C, tol):
        raise PreconditionError("the homogeneity bound of the report does not hold on these radii")

    Q = space.coerce(report.Q)
    c3, c4 = derived_constants(report.c1, report.c2, report.C, L, Q)
    masses = graph_masses(section, radii)
    zero = space.coerce(0)
    margins: List[TransferMargin] = []
    for r, row in zip(radii, masses):
        vacuous = r <= M
        if vacuous:
            logger.warning("lower bound is vacuous at r=%s <= M=%s", r, M)
        lower = zero if vacuous else c3 * (r - M) ** Q
        upper = c4 * (r + M) ** Q
        for label, mass in zip(section.fibration.labels, row):
            holds = (vacuous or leq(lower, mass, tol)) and leq(mass, upper, tol)
            margins.append(
                TransferMargin(
                    label=label, r=r, mass=mass, lower=lower, upper=upper,
                    vacuous=vacuous, holds=holds,
                )
            )

    inclusion = ball_inclusion_check(section, constants, radii)
    return RegularityTransferReport(
        subcommand="regularity",
        verdict=all(m.holds for m in margins) and inclusion.verdict,
        regularity=report,
        constants=ConstantsReport.of(constants),
        c3=c3,
        c4=c4,
        margins=margins,
        inclusion=inclusion,
    )
