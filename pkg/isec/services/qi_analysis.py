"""Intrinsic quasi-isometry of sections: decisions, optimal constants, frontiers.

A section phi is (L, M)-QI when for all ordered label pairs (y1, y2)

    d(phi(y1), phi(y2)) <= L * d(phi(y1), pi^-1(y2)) + M.

Every pair contributes the affine constraint M >= a - L*b, so the minimal
admissible M is the upper envelope of those lines (see ``envelope``). The
relative and pointed variants compare a section against another along a base
label and reduce to the same envelope with one constraint per label.
"""

from __future__ import annotations

import logging
from typing import List, Mapping, Sequence, Tuple, Union

import numpy as np

from isec.core.errors import ConsistencyError, DomainError, PreconditionError
from isec.core.numeric import Real, lt
from isec.core.parallel import parallel_map
from isec.domain.constants import Frontier, Infeasible, QIConstants, Witness
from isec.domain.fibration import Fibration, Label, Section
from isec.domain.metric import Point
from isec.domain.reports import (
    ChainReport,
    ConstantsReport,
    EquivalenceReport,
    PairConstants,
    PointEquivalence,
    RelationReport,
    TransferCheck,
)
from isec.services.envelope import Constraint, upper_envelope

logger = logging.getLogger(__name__)


# --- intrinsic QI -----------------------------------------------------------


def pair_tables(section: Section) -> Tuple[np.ndarray, np.ndarray]:
    """(a, b) with a[i, j] = d(phi(y_i), phi(y_j)) and b[i, j] = d(phi(y_i), pi^-1(y_j))."""
    idx = section.indices
    a = section.space.matrix[np.ix_(idx, idx)]
    b = section.fibration.fiber_distances()[idx, :]
    return a, b


def _scalars(section: Section, constants: QIConstants) -> Tuple[Real, Real]:
    space = section.space
    return space.coerce(constants.L), space.coerce(constants.M)


def find_qi_violation(section: Section, constants: QIConstants) -> Witness | None:
    """The ordered label pair with the largest violation, first in row-major order."""
    L, M = _scalars(section, constants)
    a, b = pair_tables(section)
    slack = a - L * b - M
    tol = section.space.comparison_tolerance
    if not np.any(np.asarray(slack > tol, dtype=bool)):
        return None
    i, j = np.unravel_index(int(np.argmax(slack)), slack.shape)
    labels = section.fibration.labels
    return labels[i], labels[j]


def is_qi_section(section: Section, constants: QIConstants) -> bool:
    """True iff the QI inequality holds for all ordered pairs, y1 = y2 included."""
    return find_qi_violation(section, constants) is None


def minimal_M(section: Section, L: object) -> Real:
    """M*(L) = max(0, max over ordered pairs of a - L*b)."""
    space = section.space
    L = space.coerce(L)
    if L < 1:
        raise DomainError(f"L must be at least 1, got {L}")
    a, b = pair_tables(section)
    return max(space.coerce(0), (a - L * b).max())


def qi_constraints(section: Section) -> List[Constraint]:
    a, b = pair_tables(section)
    labels = section.fibration.labels
    return [
        Constraint(a[i, j], b[i, j], (labels[i], labels[j]))
        for i in range(len(labels))
        for j in range(len(labels))
    ]


def qi_frontier(section: Section) -> Frontier:
    """Exact breakpoints of L -> M*(L)."""
    frontier = upper_envelope(
        qi_constraints(section),
        one=section.space.coerce(1),
        tolerance=section.space.comparison_tolerance,
    )
    logger.debug("frontier with %s vertices", len(frontier.breakpoints))
    return frontier


def minimal_L(section: Section, M: object) -> Union[Real, Infeasible]:
    """Smallest L >= 1 with M*(L) <= M, or ``Infeasible`` with the binding pair."""
    M = section.space.coerce(M)
    if M < 0:
        raise DomainError(f"M must be nonnegative, got {M}")
    return qi_frontier(section).minimal_L(M)


def classical_lower_bound_holds(section: Section, constants: QIConstants) -> bool:
    """(1/L)·d(phi(y1), pi^-1(y2)) - M <= d(phi(y1), phi(y2)) for all pairs."""
    L, M = _scalars(section, constants)
    a, b = pair_tables(section)
    tol = section.space.comparison_tolerance
    return bool(np.all(np.asarray(b / L - M <= a + tol, dtype=bool)))


# --- cones ------------------------------------------------------------------


def in_cone_R(fibration: Fibration, x: Point, x_prime: Point, constants: QIConstants) -> bool:  # noqa: N802
    """True iff L·d(x', pi^-1(pi(x))) + M < d(x', x)."""
    space = fibration.space
    i, j = space.index_of(x), space.index_of(x_prime)
    L, M = space.coerce(constants.L), space.coerce(constants.M)
    to_fiber = fibration.fiber_distances()[j, fibration.label_of_index(i)]
    return lt(L * to_fiber + M, space.matrix[j, i], space.comparison_tolerance)


def cone_witness(section: Section, constants: QIConstants) -> Tuple[Point, Point] | None:
    """First (x, x') in the graph, in label order, with x' in the cone at x."""
    fibration = section.fibration
    graph = [section.choice[y] for y in fibration.labels]
    for x in graph:
        for x_prime in graph:
            if in_cone_R(fibration, x, x_prime, constants):
                return x, x_prime
    return None


def graph_avoids_cones(section: Section, constants: QIConstants) -> bool:
    """True iff no graph point lies in the cone at another graph point."""
    return cone_witness(section, constants) is None


# --- relative and pointed QI -------------------------------------------------


def check_common_base(phi: Section, psi: Section, y_hat: Label) -> None:
    """Both sections belong to one fibration and pick the same point over ``y_hat``."""
    if not phi.fibration.same_partition(psi.fibration):
        raise PreconditionError("the sections belong to different fibrations")
    phi.fibration.label_index(y_hat)
    if phi.choice[y_hat] != psi.choice[y_hat]:
        raise PreconditionError(
            f"sections differ at base label {y_hat!r}: "
            f"{phi.choice[y_hat]!r} != {psi.choice[y_hat]!r}"
        )


def relative_tables(
    phi: Section, psi: Section, y_hat: Label, strong: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """(a, b) per label: a[y] = d(phi(y), psi(y)), b[y] the comparison distance.

    b[y] is d(psi(y_hat), psi(y)), or its minimum with d(psi(y_hat), phi(y))
    for the strong relation.
    """
    check_common_base(phi, psi, y_hat)
    matrix = phi.space.matrix
    ip, iq = phi.indices, psi.indices
    base = iq[phi.fibration.label_index(y_hat)]
    a = matrix[ip, iq]
    b = matrix[base, iq]
    if strong:
        b = np.minimum(b, matrix[base, ip])
    return a, b


def find_relative_violation(
    phi: Section, psi: Section, y_hat: Label, constants: QIConstants, strong: bool = False
) -> Label | None:
    L, M = _scalars(phi, constants)
    a, b = relative_tables(phi, psi, y_hat, strong)
    slack = a - L * b - M
    if not np.any(np.asarray(slack > phi.space.comparison_tolerance, dtype=bool)):
        return None
    return phi.fibration.labels[int(np.argmax(slack))]


def is_relative_qi(phi: Section, psi: Section, y_hat: Label, constants: QIConstants) -> bool:
    """d(phi(y), psi(y)) <= L·d(psi(y_hat), psi(y)) + M for all y."""
    return find_relative_violation(phi, psi, y_hat, constants) is None


def is_strong_relative_qi(
    phi: Section, psi: Section, y_hat: Label, constants: QIConstants
) -> bool:
    """d(phi(y), psi(y)) <= L·min{d(psi(y_hat), psi(y)), d(psi(y_hat), phi(y))} + M."""
    return find_relative_violation(phi, psi, y_hat, constants, strong=True) is None


def relative_minimal_M(
    phi: Section, psi: Section, y_hat: Label, L: object, strong: bool = False
) -> Real:
    """Smallest M making phi relative QI to psi at ``L`` (strong relation with ``strong``)."""
    space = phi.space
    L = space.coerce(L)
    if L < 1:
        raise DomainError(f"L must be at least 1, got {L}")
    a, b = relative_tables(phi, psi, y_hat, strong)
    return max(space.coerce(0), (a - L * b).max())


def relative_frontier(phi: Section, psi: Section, y_hat: Label, strong: bool = False) -> Frontier:
    """All admissible relative constants, as an exact frontier."""
    a, b = relative_tables(phi, psi, y_hat, strong)
    labels = phi.fibration.labels
    constraints = [Constraint(a[k], b[k], (labels[k],)) for k in range(len(labels))]
    return upper_envelope(
        constraints, one=phi.space.coerce(1), tolerance=phi.space.comparison_tolerance
    )


def is_pointed_qi(section: Section, y0: Label, constants: QIConstants) -> bool:
    """d(x0, phi(y)) <= L·d(x0, pi^-1(y)) + M for all y, where x0 = phi(y0)."""
    L, M = _scalars(section, constants)
    a, b = pair_tables(section)
    row = section.fibration.label_index(y0)
    tol = section.space.comparison_tolerance
    return bool(np.all(np.asarray(a[row] - L * b[row] - M <= tol, dtype=bool)))


def pointed_minimal_M(section: Section, y0: Label, L: object) -> Real:
    """Smallest M for the pointed condition at phi(y0)."""
    space = section.space
    L = space.coerce(L)
    a, b = pair_tables(section)
    row = section.fibration.label_index(y0)
    return max(space.coerce(0), (a[row] - L * b[row]).max())


# --- constant transfer --------------------------------------------------------


def _require_constants(L: Real, M: Real) -> None:
    if L < 1:
        raise DomainError(f"multiplicative constants must be at least 1, got {L}")
    if M < 0:
        raise DomainError(f"additive constants must be nonnegative, got {M}")


def transfer_constants_forward(L: Real, L1: Real, M: Real, M1: Real) -> QIConstants:
    """(L(L1+1), M1+M): the pointed constants as written in the equivalence proof.

    They are guaranteed only when M = 0; ``sound_forward_constants`` covers M > 0.
    """
    _require_constants(L, M)
    _require_constants(L1, M1)
    return QIConstants(L=L * (L1 + 1), M=M1 + M)


def sound_forward_constants(L: Real, L1: Real, M: Real, M1: Real) -> QIConstants:
    """(L(L1+1), (L1+1)M + M1): pointed constants valid for every M >= 0."""
    _require_constants(L, M)
    _require_constants(L1, M1)
    return QIConstants(L=L * (L1 + 1), M=(L1 + 1) * M + M1)


def transfer_constants_backward(L2: Real, M2: Real) -> QIConstants:
    """(L2+1, M2): relative constants from pointed ones."""
    _require_constants(L2, M2)
    return QIConstants(L=L2 + 1, M=M2)


def constant_transfer_check(
    phi: Section,
    phi0: Section,
    y0: Label,
    constants: QIConstants,
    relative: QIConstants,
    pointed: QIConstants | None = None,
) -> TransferCheck:
    """Run both transfer directions between relative and pointed QI at ``y0``.

    ``constants`` must be valid for the reference ``phi0``. The forward direction
    assumes phi is ``relative``-QI to phi0; the backward direction assumes the
    pointed bound with ``pointed`` (by default the best one at relative.L).
    A sound transfer that fails on its own hypothesis raises ``ConsistencyError``.
    """
    check_common_base(phi, phi0, y0)
    if not is_qi_section(phi0, constants):
        raise PreconditionError("the constants are not valid for the reference section")
    space = phi.space

    sound = sound_forward_constants(
        space.coerce(constants.L), space.coerce(relative.L),
        space.coerce(constants.M), space.coerce(relative.M),
    )
    literal = transfer_constants_forward(
        space.coerce(constants.L), space.coerce(relative.L),
        space.coerce(constants.M), space.coerce(relative.M),
    )
    forward_hypothesis = is_relative_qi(phi, phi0, y0, relative)
    forward_holds = is_pointed_qi(phi, y0, sound)
    literal_holds = is_pointed_qi(phi, y0, literal)
    if forward_hypothesis and not forward_holds:
        raise ConsistencyError(f"forward constant transfer failed at base label {y0!r}")
    if forward_hypothesis and not literal_holds:
        logger.info("literal forward constants do not suffice at base label %s", y0)

    if pointed is None:
        L2 = space.coerce(relative.L)
        pointed = QIConstants(L=L2, M=pointed_minimal_M(phi, y0, L2))
    pointed_hypothesis = is_pointed_qi(phi, y0, pointed)
    backward = transfer_constants_backward(space.coerce(pointed.L), space.coerce(pointed.M))
    backward_holds = is_relative_qi(phi, phi0, y0, backward)
    if pointed_hypothesis and not backward_holds:
        raise ConsistencyError(f"backward constant transfer failed at base label {y0!r}")

    return TransferCheck(
        base=y0,
        forward_hypothesis=forward_hypothesis,
        forward_constants=ConstantsReport.of(sound),
        forward_holds=forward_holds,
        literal_constants=ConstantsReport.of(literal),
        literal_holds=literal_holds,
        pointed_hypothesis=pointed_hypothesis,
        pointed_constants=ConstantsReport.of(pointed),
        backward_constants=ConstantsReport.of(backward),
        backward_holds=backward_holds,
    )


def global_equivalence_check(
    section: Section,
    family: Mapping[Point, Section],
    constants: QIConstants,
    L1: object = 1,
    threads: int = 1,
) -> EquivalenceReport:
    """Relative QI against a family of QI sections versus intrinsic QI.

    ``family[x]`` must be a ``constants``-QI section through x for every graph
    point x. For each x the relative constants (L1, M1(x)) are found by
    frontier search and transferred forward; the worst transferred constants
    must make the section intrinsically QI. Conversely the section's own
    constants at L = 1, transferred backward, must make it relative QI to every
    member of the family.
    """
    fibration = section.fibration
    space = section.space
    L1 = space.coerce(L1)
    for y in fibration.labels:
        x = section.choice[y]
        psi = family.get(x)
        if psi is None:
            raise PreconditionError(f"the family has no section through {x!r}")
        if psi.choice[y] != x:
            raise PreconditionError(f"family[{x!r}] does not pass through {x!r}")
        if not is_qi_section(psi, constants):
            raise PreconditionError(f"family[{x!r}] is not QI with the given constants")

    def analyse(y: Label) -> PointEquivalence:
        x = section.choice[y]
        psi = family[x]
        relative = QIConstants(L=L1, M=relative_minimal_M(section, psi, y, L1))
        transfer = constant_transfer_check(section, psi, y, constants, relative)
        return PointEquivalence(
            point=x,
            label=y,
            relative_constants=ConstantsReport.of(relative),
            transfer=transfer,
        )

    points = parallel_map(analyse, fibration.labels, threads)

    derived = QIConstants(
        L=max(p.transfer.forward_constants.L for p in points),
        M=max(p.transfer.forward_constants.M for p in points),
    )
    intrinsic_statement = is_qi_section(section, derived)
    if not intrinsic_statement:
        raise ConsistencyError("uniform relative constants did not give intrinsic constants")

    own = QIConstants(L=space.coerce(1), M=minimal_M(section, 1))
    derived_relative = transfer_constants_backward(own.L, own.M)
    relative_statement = all(
        is_relative_qi(section, family[section.choice[y]], y, derived_relative)
        for y in fibration.labels
    )
    if not relative_statement:
        raise ConsistencyError("intrinsic constants did not give relative constants")

    return EquivalenceReport(
        subcommand="equivalence",
        verdict=relative_statement == intrinsic_statement,
        relative_statement=relative_statement,
        intrinsic_statement=intrinsic_statement,
        intrinsic_constants=ConstantsReport.of(own),
        derived_intrinsic_constants=ConstantsReport.of(derived),
        derived_relative_constants=ConstantsReport.of(derived_relative),
        points=points,
    )


# --- the strong relation -------------------------------------------------------


def _own_constants(frontier: Frontier, pair: Tuple[int, int]) -> QIConstants:
    if frontier.L_flat is None:
        raise ConsistencyError(f"strong frontier of pair {pair} never reaches 0")
    return QIConstants(L=frontier.L_flat, M=frontier.tail)


def strong_relation_check(
    sections: Sequence[Section],
    y_hat: Label,
    L: object = 1,
    threads: int = 1,
) -> RelationReport:
    """Reflexivity, symmetry and transitivity of the strong relative relation.

    Constants for every ordered pair are (L, M*(L)) from the strong envelope.
    Transitivity is established constructively. Each pair also has its own
    constants (L_ij, 0), L_ij being where its strong frontier reaches 0, and
    whether the chain constant (min{L_ij, L_jk}, M_ij + M_jk) built from them
    would have sufficed is recorded.
    """
    if not sections:
        raise PreconditionError("at least one section is required")
    first = sections[0]
    for other in sections[1:]:
        check_common_base(first, other, y_hat)
    space = first.space
    L = space.coerce(L)
    count = len(sections)
    pairs = [(i, j) for i in range(count) for j in range(count)]
    values = parallel_map(
        lambda ij: relative_minimal_M(sections[ij[0]], sections[ij[1]], y_hat, L, strong=True),
        pairs,
        threads,
    )
    table = {ij: m for ij, m in zip(pairs, values)}
    frontiers = parallel_map(
        lambda ij: relative_frontier(sections[ij[0]], sections[ij[1]], y_hat, strong=True),
        pairs,
        threads,
    )
    own = {ij: _own_constants(frontier, ij) for ij, frontier in zip(pairs, frontiers)}

    identity = QIConstants(L=space.coerce(1), M=space.coerce(0))
    reflexive = all(is_strong_relative_qi(s, s, y_hat, identity) for s in sections)
    symmetric = all(
        is_strong_relative_qi(sections[j], sections[i], y_hat, QIConstants(L=L, M=table[i, j]))
        for i, j in pairs
    )

    chains: List[ChainReport] = []
    transitive = True
    for i in range(count):
        for j in range(count):
            for k in range(count):
                if len({i, j, k}) < 3:
                    continue
                found = QIConstants(L=L, M=table[i, k])
                holds = is_strong_relative_qi(sections[i], sections[k], y_hat, found)
                transitive = transitive and holds
                proof = QIConstants(
                    L=min(own[i, j].L, own[j, k].L), M=own[i, j].M + own[j, k].M
                )
                chains.append(
                    ChainReport(
                        first=i,
                        middle=j,
                        last=k,
                        constants=ConstantsReport.of(found),
                        proof_constants=ConstantsReport.of(proof),
                        proof_constants_suffice=is_strong_relative_qi(
                            sections[i], sections[k], y_hat, proof
                        ),
                    )
                )

    return RelationReport(
        subcommand="relation",
        verdict=reflexive and symmetric and transitive,
        base=y_hat,
        pairs=[
            PairConstants(first=i, second=j, constants=ConstantsReport(L=L, M=table[i, j]))
            for i, j in pairs
        ],
        reflexive=reflexive,
        symmetric=symmetric,
        transitive=transitive,
        chains=chains,
    )
