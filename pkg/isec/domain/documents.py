"""JSON documents for instances and sections.

These models define the on-disk and over-the-wire shape of the inputs:

- InstanceDocument: points, a metric (explicit matrix, l-infinity grid or
  sampled normed vectors) and an optional fibration
- SectionDocument: label -> chosen point
- LinearInstanceDocument / LinearSectionDocument: the linear model

Each document knows how to build the validated domain object and how to be
produced back from one, so generated instances round-trip byte for byte.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Annotated, Dict, List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from isec.core.errors import InstanceError
from isec.core.numeric import Real
from isec.domain.fibration import Fibration, Label, Section
from isec.domain.linear import LinearFibration, LinearSection
from isec.domain.metric import FiniteMetricSpace, NormedInstance, NormKind, Point, point_key

# A scalar as written in JSON: integer, float or an exact rational "p/q".
Number = Union[int, float, str]

# A point identifier as written in JSON; lists become tuples.
PointValue = Union[int, str, Tuple[int, ...]]


def number_to_json(value: Real) -> Number:
    """Shortest JSON form of a scalar: ints stay ints, other rationals become "p/q"."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return float(value)


class MatrixMetric(BaseModel):
    """Explicit n x n distance matrix aligned with ``points``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["matrix"] = "matrix"
    dist: List[List[Number]]


class GridMetric(BaseModel):
    """The cols x rows integer grid {(i, j)} with the l-infinity metric."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["grid_linf"] = "grid_linf"
    rows: int = Field(..., gt=0)
    cols: int = Field(..., gt=0)


class NormedMetric(BaseModel):
    """Sampled vectors of R^n; point i is ``vectors[i]``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["normed"] = "normed"
    norm: NormKind = "l2"
    vectors: List[List[float]]


MetricDocument = Annotated[
    Union[MatrixMetric, GridMetric, NormedMetric],
    Field(discriminator="kind"),
]


class FibrationDocument(BaseModel):
    """Labels, the quotient map keyed by point key, and optional weights."""

    model_config = ConfigDict(frozen=True)

    labels: List[Label]
    fiber_of: Dict[str, Label]
    measure: Dict[str, Number] | None = None


class InstanceDocument(BaseModel):
    """A finite metric space together with a fibration of it.

    Without a ``fibration`` block a grid is fibered by its columns and every
    other metric by singletons (label i for point i).
    """

    model_config = ConfigDict(frozen=True)

    points: List[PointValue] | None = None
    metric: MetricDocument
    exact: bool = False
    trusted: bool = False
    fibration: FibrationDocument | None = None

    @model_validator(mode="after")
    def validate_points(self) -> "InstanceDocument":
        if isinstance(self.metric, MatrixMetric) and self.points is None:
            raise ValueError("a matrix metric needs an explicit 'points' list")
        return self

    def build_space(self, tolerance: float = 1e-9) -> FiniteMetricSpace:
        metric = self.metric
        if isinstance(metric, GridMetric):
            points, dist = _grid_linf(metric.rows, metric.cols)
            if self.points is not None and tuple(self.points) != points:
                raise InstanceError("explicit points do not match the grid")
            return FiniteMetricSpace(
                points=points, dist=dist, exact=self.exact, trusted=self.trusted,
                tolerance=tolerance,
            )
        if isinstance(metric, NormedMetric):
            dimension = len(metric.vectors[0]) if metric.vectors else 1
            normed = NormedInstance(
                dimension=dimension,
                norm_kind=metric.norm,
                vectors=tuple(tuple(v) for v in metric.vectors),
            )
            matrix = normed.distance_matrix()
            points = tuple(self.points) if self.points is not None else tuple(range(len(matrix)))
            return FiniteMetricSpace(
                points=points,
                dist=tuple(tuple(float(v) for v in row) for row in matrix),
                exact=self.exact,
                trusted=self.trusted,
                tolerance=tolerance,
            )
        return FiniteMetricSpace(
            points=tuple(self.points or ()),
            dist=tuple(tuple(row) for row in metric.dist),
            exact=self.exact,
            trusted=self.trusted,
            tolerance=tolerance,
        )

    def build(self, tolerance: float = 1e-9) -> Fibration:
        """Validate the metric and the fibration and return the fibration."""
        space = self.build_space(tolerance)
        if self.fibration is None:
            if isinstance(self.metric, GridMetric):
                labels: Tuple[Label, ...] = tuple(range(self.metric.cols))
                fiber_of = {p: p[0] for p in space.points}  # type: ignore[index]
            else:
                labels = tuple(range(space.size))
                fiber_of = {p: i for i, p in enumerate(space.points)}
            return Fibration(space=space, labels=labels, fiber_of=fiber_of)

        keyed = _points_by_key(space)
        fiber_of_points: Dict[Point, Label] = {}
        for key, label in self.fibration.fiber_of.items():
            if key not in keyed:
                raise InstanceError(f"fiber_of names unknown point {key!r}")
            fiber_of_points[keyed[key]] = label
        measure = None
        if self.fibration.measure is not None:
            labels_by_key = {str(y): y for y in self.fibration.labels}
            measure = {}
            for key, weight in self.fibration.measure.items():
                if key not in labels_by_key:
                    raise InstanceError(f"measure names unknown label {key!r}")
                measure[labels_by_key[key]] = space.coerce(weight)
        return Fibration(
            space=space,
            labels=tuple(self.fibration.labels),
            fiber_of=fiber_of_points,
            measure=measure,
        )

    @classmethod
    def from_fibration(cls, fibration: Fibration, grid: Tuple[int, int] | None = None) -> "InstanceDocument":
        """Document for a fibration; ``grid=(rows, cols)`` keeps the compact grid form."""
        space = fibration.space
        metric: Union[MatrixMetric, GridMetric]
        if grid is not None:
            metric = GridMetric(rows=grid[0], cols=grid[1])
            points = None
        else:
            metric = MatrixMetric(dist=[[number_to_json(v) for v in row] for row in space.dist])
            points = [p for p in space.points]
        measure = None
        if fibration.measure is not None:
            measure = {str(y): number_to_json(w) for y, w in fibration.measure.items()}
        return cls(
            points=points,
            metric=metric,
            exact=space.exact,
            trusted=space.trusted,
            fibration=FibrationDocument(
                labels=list(fibration.labels),
                fiber_of={point_key(p): fibration.fiber_of[p] for p in space.points},
                measure=measure,
            ),
        )


class SectionDocument(BaseModel):
    """``choice`` maps a label (as a JSON key) to a point identifier."""

    model_config = ConfigDict(frozen=True)

    choice: Dict[str, PointValue]

    def build(self, fibration: Fibration) -> Section:
        labels_by_key = {str(y): y for y in fibration.labels}
        keyed = _points_by_key(fibration.space)
        choice: Dict[Label, Point] = {}
        for key, value in self.choice.items():
            if key not in labels_by_key:
                raise InstanceError(f"section chooses over unknown label {key!r}")
            point_id = point_key(value)
            if point_id not in keyed:
                raise InstanceError(f"section chooses unknown point {value!r}")
            choice[labels_by_key[key]] = keyed[point_id]
        return Section(fibration=fibration, choice=choice)

    @classmethod
    def from_section(cls, section: Section) -> "SectionDocument":
        return cls(
            choice={str(y): section.choice[y] for y in section.fibration.labels},
        )


class LinearInstanceDocument(BaseModel):
    """``{"A": [[...]], "norm": "l2", "y_grid": [[...]], "scale": 1.0}``."""

    model_config = ConfigDict(frozen=True)

    A: List[List[float]]
    norm: NormKind = "l2"
    y_grid: List[List[float]]
    scale: float = 1.0
    fiber_radius: float | None = None

    def build(self) -> LinearFibration:
        return LinearFibration(
            A=tuple(tuple(row) for row in self.A),
            norm_kind=self.norm,
            y_grid=tuple(tuple(y) for y in self.y_grid),
            scale=self.scale,
            fiber_radius=self.fiber_radius,
        )

    @classmethod
    def from_fibration(cls, fibration: LinearFibration) -> "LinearInstanceDocument":
        return cls(
            A=[list(row) for row in fibration.A],
            norm=fibration.norm_kind,
            y_grid=[list(y) for y in fibration.y_grid],
            scale=fibration.scale,
            fiber_radius=fibration.fiber_radius,
        )


class LinearSectionDocument(BaseModel):
    """``choice`` maps a grid index (as a JSON key) to an n-vector.

    ``scale`` overrides the instance's scale, for sections of a rescaled quotient.
    """

    model_config = ConfigDict(frozen=True)

    choice: Dict[str, List[float]]
    scale: float | None = None

    def build(self, fibration: LinearFibration) -> LinearSection:
        if self.scale is not None and self.scale != fibration.scale:
            fibration = fibration.with_scale(self.scale)
        size = len(fibration.y_grid)
        vectors = []
        for i in range(size):
            if str(i) not in self.choice:
                raise InstanceError(f"linear section has no vector for grid index {i}")
            vectors.append(tuple(self.choice[str(i)]))
        extra = set(self.choice) - {str(i) for i in range(size)}
        if extra:
            raise InstanceError(f"linear section names unknown grid index {sorted(extra)[0]!r}")
        return LinearSection(fibration=fibration, choice=tuple(vectors))

    @classmethod
    def from_section(cls, section: LinearSection) -> "LinearSectionDocument":
        return cls(
            choice={str(i): list(v) for i, v in enumerate(section.choice)},
            scale=section.fibration.scale,
        )


class RegularityParams(BaseModel):
    """Exponent, threshold and radius grid for the regularity analyses."""

    model_config = ConfigDict(frozen=True)

    Q: float = Field(default=1.0, gt=0)
    r0: float = Field(default=1.0, gt=0)
    r_grid: List[Number] = Field(default_factory=lambda: [2, 3, 4, 5])


def _grid_linf(rows: int, cols: int) -> Tuple[Tuple[Point, ...], Tuple[Tuple[int, ...], ...]]:
    points: Tuple[Point, ...] = tuple((i, j) for i in range(cols) for j in range(rows))
    dist = tuple(
        tuple(max(abs(p[0] - q[0]), abs(p[1] - q[1])) for q in points)  # type: ignore[index]
        for p in points
    )
    return points, dist


def _points_by_key(space: FiniteMetricSpace) -> Dict[str, Point]:
    return {point_key(p): p for p in space.points}
