"""Report models emitted by the CLI and the HTTP API.

Numbers are kept in the instance's arithmetic (``Fraction`` on exact
instances) and serialized to JSON as floats.
"""

from __future__ import annotations

from typing import Annotated, Any, Dict, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer

from isec.core.numeric import Real
from isec.domain.constants import Frontier, QIConstants, Witness
from isec.domain.fibration import Label
from isec.domain.metric import Point

ReportNumber = Annotated[Real, PlainSerializer(float, return_type=float, when_used="json")]


class ReportModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class ConstantsReport(ReportModel):
    L: ReportNumber
    M: ReportNumber

    @classmethod
    def of(cls, constants: QIConstants) -> "ConstantsReport":
        return cls(L=constants.L, M=constants.M)


class FrontierReport(ReportModel):
    """Vertices of M*(L); constant after the last one."""

    breakpoints: List[Tuple[ReportNumber, ReportNumber]]
    witnesses: List[Witness | None]
    L_flat: ReportNumber | None = None

    @classmethod
    def of(cls, frontier: Frontier) -> "FrontierReport":
        return cls(
            breakpoints=[(l, m) for l, m in frontier.breakpoints],
            witnesses=list(frontier.witnesses),
            L_flat=frontier.L_flat,
        )


class OracleReport(ReportModel):
    """Outcome of cross-running a brute-force oracle against the main path."""

    method: str
    value: ReportNumber | bool | None = None
    agrees: bool


class Report(ReportModel):
    """Fields shared by every report."""

    subcommand: str
    verdict: bool
    seed: int = 0
    inputs: Dict[str, Any] = Field(default_factory=dict, description="Echo of the inputs")
    notes: List[str] = Field(default_factory=list)


class QICheckReport(Report):
    constants: ConstantsReport
    minimal_M: ReportNumber = Field(..., description="M*(L) at the requested L")
    minimal_L: ReportNumber | None = Field(
        default=None, description="Smallest L admissible with the requested M"
    )
    infeasible: str | None = None
    witness: Witness | None = Field(default=None, description="Worst violating label pair")
    frontier: FrontierReport
    oracle: OracleReport | None = None


class FrontierAnalysisReport(Report):
    frontier: FrontierReport
    minimal_M_at_one: ReportNumber
    oracle: OracleReport | None = None


class ConesReport(Report):
    constants: ConstantsReport
    witness: Tuple[Point, Point] | None = Field(
        default=None, description="(x, x') with x' in the cone at the graph point x"
    )
    matches_qi: bool
    oracle: OracleReport | None = None


class RelativeReport(Report):
    base: Label
    constants: ConstantsReport
    plain: bool
    strong: bool
    plain_frontier: FrontierReport
    strong_frontier: FrontierReport
    witness: Witness | None = None


class PairConstants(ReportModel):
    first: int
    second: int
    constants: ConstantsReport


class ChainReport(ReportModel):
    """Constants found for first ~ last through first ~ middle ~ last."""

    first: int
    middle: int
    last: int
    constants: ConstantsReport
    proof_constants: ConstantsReport
    proof_constants_suffice: bool


class RelationReport(Report):
    base: Label
    pairs: List[PairConstants]
    reflexive: bool
    symmetric: bool
    transitive: bool
    chains: List[ChainReport]


class TransferCheck(ReportModel):
    """Both directions of the relative <-> pointed constant transfer at one base label."""

    base: Label
    forward_hypothesis: bool
    forward_constants: ConstantsReport
    forward_holds: bool
    literal_constants: ConstantsReport
    literal_holds: bool
    pointed_hypothesis: bool
    pointed_constants: ConstantsReport
    backward_constants: ConstantsReport
    backward_holds: bool


class PointEquivalence(ReportModel):
    point: Point
    label: Label
    relative_constants: ConstantsReport
    transfer: TransferCheck


class EquivalenceReport(Report):
    relative_statement: bool
    intrinsic_statement: bool
    intrinsic_constants: ConstantsReport
    derived_intrinsic_constants: ConstantsReport
    derived_relative_constants: ConstantsReport
    points: List[PointEquivalence]


class AlgebraCheck(ReportModel):
    name: str
    holds: bool
    constants: ConstantsReport | None = None
    found_M: ReportNumber | None = None
    detail: str = ""


class AlgebraReport(Report):
    checks: List[AlgebraCheck]


class RadiusVerdict(ReportModel):
    r: ReportNumber
    min_mass: ReportNumber
    max_mass: ReportNumber
    holds: bool


class RegularityReport(ReportModel):
    """Large-scale regularity data of one section and the transfer constants.

    ``c3 = c1 / (C * L**Q)`` and ``c4 = c2 * C * L**Q``; both are None when the
    homogeneity constant is infeasible.
    """

    Q: ReportNumber
    r0: ReportNumber
    r_grid: List[ReportNumber]
    L: ReportNumber
    M: ReportNumber
    C: ReportNumber | None
    C_infeasible: str | None = None
    C_witness: Tuple[Point, Point, ReportNumber] | None = None
    c1: ReportNumber
    c2: ReportNumber
    c3: ReportNumber | None
    c4: ReportNumber | None
    lower_witness: Tuple[Label, ReportNumber] | None = None
    upper_witness: Tuple[Label, ReportNumber] | None = None
    fitted_Q: float | None = Field(default=None, description="Diagnostic only")
    verdicts: List[RadiusVerdict]


class InclusionFailure(ReportModel):
    center: Label
    r: ReportNumber
    inclusion: Literal["inner", "outer"]
    label: Label


class InclusionReport(Report):
    constants: ConstantsReport
    r_grid: List[ReportNumber]
    failures: List[InclusionFailure]


class TransferMargin(ReportModel):
    label: Label
    r: ReportNumber
    mass: ReportNumber
    lower: ReportNumber
    upper: ReportNumber
    vacuous: bool
    holds: bool


class RegularityTransferReport(Report):
    regularity: RegularityReport
    constants: ConstantsReport
    c3: ReportNumber
    c4: ReportNumber
    margins: List[TransferMargin]
    inclusion: InclusionReport | None = None


class BatteryReport(Report):
    """Everything ``isec report`` runs on one section."""

    check: QICheckReport
    cones: ConesReport
    inclusion: InclusionReport
    classical_lower_bound: bool
    fiber_diameter_bound: ReportNumber
