"""Report assembly shared by the command-line front end and the HTTP API.

Each builder runs one analysis on validated domain objects and returns the
report model. With ``oracle=True`` the brute-force path is cross-run and any
disagreement raises ``ConsistencyError``.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Dict, List, Sequence

from isec.core.errors import ConsistencyError, PreconditionError
from isec.core.numeric import Real, to_exact
from isec.domain.constants import Frontier, Infeasible, QIConstants
from isec.domain.fibration import Label, Section
from isec.domain.linear import LinearSection
from isec.domain.reports import (
    AlgebraCheck,
    AlgebraReport,
    BatteryReport,
    ConesReport,
    ConstantsReport,
    FrontierAnalysisReport,
    FrontierReport,
    OracleReport,
    QICheckReport,
    RelationReport,
    RelativeReport,
)
from isec.services import linear_structure as linear
from isec.services.fibration import fiber_diameter_bound
from isec.services.oracles import (
    oracle_frontier_scan,
    oracle_graph_avoids_cones,
    oracle_minimal_M,
    oracle_relation_constants,
)
from isec.services.qi_analysis import (
    classical_lower_bound_holds,
    cone_witness,
    find_qi_violation,
    find_relative_violation,
    is_qi_section,
    minimal_M,
    qi_frontier,
    relative_frontier,
    strong_relation_check,
)
from isec.services.regularity import ball_inclusion_check

logger = logging.getLogger(__name__)

# Absolute agreement required between oracle and main path on float instances.
ORACLE_TOLERANCE = 1e-9

SUM_SCALE_NOTE = (
    "sums are checked as sections of the rescaled quotient: phi + eta with scales "
    "s1 and s2 is a section for scale s1 + s2 (of (1/2)·pi when s1 = s2 = 1), "
    "never of the original quotient pi"
)


def _agree(section: Section, lhs: Real, rhs: Real) -> bool:
    if section.space.exact:
        return lhs == rhs
    return abs(float(lhs) - float(rhs)) <= ORACLE_TOLERANCE


def oracle_scan_grid(
    frontier: Frontier, step: object = "1/100", span: object = 1
) -> List[Fraction]:
    """Exact L values from 1 to ``span`` past the last breakpoint, plus every breakpoint."""
    increment, reach = to_exact(step), to_exact(span)
    last = to_exact(frontier.breakpoints[-1][0])
    count = int((last - 1 + reach) / increment) + 1
    grid = {1 + k * increment for k in range(count)}
    grid.update(to_exact(L) for L, _ in frontier.breakpoints)
    return sorted(grid)


def cross_check_frontier(section: Section, frontier: Frontier, L_grid: Sequence[object]) -> OracleReport:
    """Compare the envelope against the oracle's scan on ``L_grid``."""
    space = section.space
    for L, expected in oracle_frontier_scan(section, L_grid):
        found = frontier.evaluate(space.coerce(L))
        if not _agree(section, found, expected):
            raise ConsistencyError(
                f"frontier disagrees with the oracle at L={L}: {found} != {expected}"
            )
    return OracleReport(method="grid scan of the double loop", value=None, agrees=True)


def check_report(
    section: Section,
    constants: QIConstants,
    seed: int = 0,
    inputs: Dict[str, Any] | None = None,
    frontier: Frontier | None = None,
    oracle: bool = False,
) -> QICheckReport:
    """Decide (L, M)-QI and report the optimal constants around the request."""
    space = section.space
    frontier = frontier or qi_frontier(section)
    L, M = space.coerce(constants.L), space.coerce(constants.M)
    found_M = frontier.evaluate(L)
    found_L = frontier.minimal_L(M)
    witness = find_qi_violation(section, constants)
    verdict = witness is None
    if verdict != (found_M <= M + space.comparison_tolerance):
        raise ConsistencyError("decision and frontier disagree")

    oracle_report = None
    if oracle:
        result = oracle_minimal_M(section, L)
        if not _agree(section, result.value, found_M):  # type: ignore[arg-type]
            raise ConsistencyError(f"oracle found M*={result.value}, envelope found {found_M}")
        oracle_report = OracleReport(method=result.method, value=result.value, agrees=True)

    return QICheckReport(
        subcommand="check",
        verdict=verdict,
        seed=seed,
        inputs=inputs or {},
        constants=ConstantsReport.of(constants),
        minimal_M=found_M,
        minimal_L=None if isinstance(found_L, Infeasible) else found_L,
        infeasible=found_L.reason if isinstance(found_L, Infeasible) else None,
        witness=witness,
        frontier=FrontierReport.of(frontier),
        oracle=oracle_report,
    )


def frontier_report(
    section: Section,
    seed: int = 0,
    inputs: Dict[str, Any] | None = None,
    frontier: Frontier | None = None,
    oracle: bool = False,
) -> FrontierAnalysisReport:
    frontier = frontier or qi_frontier(section)
    oracle_report = None
    if oracle:
        oracle_report = cross_check_frontier(section, frontier, oracle_scan_grid(frontier))
    return FrontierAnalysisReport(
        subcommand="frontier",
        verdict=True,
        seed=seed,
        inputs=inputs or {},
        frontier=FrontierReport.of(frontier),
        minimal_M_at_one=frontier.evaluate(section.space.coerce(1)),
        oracle=oracle_report,
    )


def cones_report(
    section: Section,
    constants: QIConstants,
    seed: int = 0,
    inputs: Dict[str, Any] | None = None,
    oracle: bool = False,
) -> ConesReport:
    """Whether the graph avoids every cone; agrees with the QI decision by construction."""
    witness = cone_witness(section, constants)
    avoids = witness is None
    matches_qi = avoids == is_qi_section(section, constants)
    if not matches_qi:
        raise ConsistencyError("cone avoidance and the QI decision disagree")
    oracle_report = None
    if oracle:
        result = oracle_graph_avoids_cones(section, constants)
        if result.value != avoids:
            raise ConsistencyError(f"cone oracle says {result.value}, scan says {avoids}")
        oracle_report = OracleReport(method=result.method, value=result.value, agrees=True)
    return ConesReport(
        subcommand="cones",
        verdict=avoids,
        seed=seed,
        inputs=inputs or {},
        constants=ConstantsReport.of(constants),
        witness=witness,
        matches_qi=matches_qi,
        oracle=oracle_report,
    )


def relative_report(
    phi: Section,
    psi: Section,
    y_hat: Label,
    constants: QIConstants,
    strong: bool = False,
    seed: int = 0,
    inputs: Dict[str, Any] | None = None,
) -> RelativeReport:
    """Relative QI of phi to psi along ``y_hat``, plain and strong."""
    plain_violation = find_relative_violation(phi, psi, y_hat, constants)
    strong_violation = find_relative_violation(phi, psi, y_hat, constants, strong=True)
    violation = strong_violation if strong else plain_violation
    return RelativeReport(
        subcommand="relative",
        verdict=violation is None,
        seed=seed,
        inputs=inputs or {},
        base=y_hat,
        constants=ConstantsReport.of(constants),
        plain=plain_violation is None,
        strong=strong_violation is None,
        plain_frontier=FrontierReport.of(relative_frontier(phi, psi, y_hat)),
        strong_frontier=FrontierReport.of(relative_frontier(phi, psi, y_hat, strong=True)),
        witness=None if violation is None else (violation,),
    )


def relation_report(
    sections: Sequence[Section],
    y_hat: Label,
    L: object = 1,
    seed: int = 0,
    inputs: Dict[str, Any] | None = None,
    threads: int = 1,
    oracle: bool = False,
) -> RelationReport:
    """The strong relation on ``sections``; the oracle re-derives every pair's M."""
    report = strong_relation_check(sections, y_hat, L, threads)
    if oracle:
        for pair in report.pairs:
            result = oracle_relation_constants(
                sections[pair.first], sections[pair.second], y_hat, pair.constants.L
            )
            if not _agree(sections[0], result.value.M, pair.constants.M):  # type: ignore[union-attr]
                raise ConsistencyError(
                    f"oracle disagrees on pair ({pair.first}, {pair.second}): "
                    f"{result.value.M} != {pair.constants.M}"  # type: ignore[union-attr]
                )
    return report.model_copy(update={"seed": seed, "inputs": inputs or {}})


def battery_report(
    section: Section,
    constants: QIConstants,
    r_grid: Sequence[object],
    seed: int = 0,
    inputs: Dict[str, Any] | None = None,
    oracle: bool = False,
) -> BatteryReport:
    """Frontier, decision, cones, ball inclusions and the classical lower bound.

    When the section is not QI with ``constants`` the inclusions are checked
    with (L, M*(L)) instead, and a note says so.
    """
    space = section.space
    frontier = qi_frontier(section)
    check = check_report(section, constants, seed, inputs, frontier=frontier, oracle=oracle)
    if oracle:
        cross_check_frontier(section, frontier, oracle_scan_grid(frontier))
    cones = cones_report(section, constants, seed, inputs, oracle=oracle)
    notes: List[str] = []
    valid = constants
    if not check.verdict:
        L = space.coerce(constants.L)
        valid = QIConstants(L=L, M=minimal_M(section, L))
        notes.append(f"ball inclusions checked with the minimal constants (L={L}, M={valid.M})")
    inclusion = ball_inclusion_check(section, valid, r_grid)
    classical = classical_lower_bound_holds(section, valid)
    if not classical:
        raise ConsistencyError("the classical lower bound failed for valid constants")
    return BatteryReport(
        subcommand="report",
        verdict=check.verdict and cones.matches_qi and inclusion.verdict,
        seed=seed,
        inputs=inputs or {},
        notes=notes,
        check=check,
        cones=cones,
        inclusion=inclusion,
        classical_lower_bound=classical,
        fiber_diameter_bound=fiber_diameter_bound(section.fibration),
    )


def algebra_report(
    phi: LinearSection,
    eta: LinearSection,
    psi: LinearSection,
    base: int,
    t_values: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
    betas: Sequence[float] = (-2.0, 0.5, 3.0),
    L: float = 1.0,
    seed: int = 0,
    inputs: Dict[str, Any] | None = None,
) -> AlgebraReport:
    """Convexity, vector-space closure and the scaled-fiber identity on one linear instance.

    phi and eta must agree with the reference psi at ``base``; their relative
    constants are found at ``L``.
    """
    if L < 1:
        raise PreconditionError(f"L must be at least 1, got {L}")
    c_phi = QIConstants(L=L, M=linear.linear_relative_minimal_M(phi, psi, base, L))
    c_eta = QIConstants(L=L, M=linear.linear_relative_minimal_M(eta, psi, base, L))
    checks: List[AlgebraCheck] = [
        linear.verify_convexity(phi, eta, psi, base, t, c_phi, c_eta) for t in t_values
    ]
    checks.append(linear.verify_sum_membership(phi, eta, psi, base, 1.0, 1.0, c_phi, c_eta))
    own = QIConstants(L=L, M=linear.linear_minimal_M(phi, L))
    for beta in betas:
        checks.append(linear.verify_scalar_membership(phi, psi, base, 1.0, beta, c_phi))
        checks.append(linear.verify_scalar_qi(beta, phi, own))
    fibration = phi.fibration
    if fibration.fiber_radius is not None:
        checks.append(linear.verify_bounded_fiber_sum(phi, eta))
    else:
        for lam in betas:
            checks.append(
                AlgebraCheck(
                    name="scaled_fiber_identity",
                    holds=linear.scaled_fiber_identity_holds(fibration, lam),
                    detail=f"lambda={lam}",
                )
            )
    failed = [c.name for c in checks if not c.holds]
    if failed:
        logger.warning("algebra checks failed: %s", ", ".join(failed))
    return AlgebraReport(
        subcommand="algebra",
        verdict=not failed,
        seed=seed,
        inputs=inputs or {},
        notes=[SUM_SCALE_NOTE],
        checks=checks,
    )
