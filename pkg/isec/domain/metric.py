"""Finite metric spaces and sampled normed spaces.

A ``FiniteMetricSpace`` is a list of opaque point identifiers plus a validated
distance matrix. Entries are floats, or ``Fraction`` when the instance is
declared exact.
"""

from __future__ import annotations

import math
from typing import Any, Dict, Literal, Tuple, Union

import numpy as np
from pydantic import Field, PrivateAttr, field_validator, model_validator
from scipy.spatial.distance import cdist

from isec.core.errors import InstanceError
from isec.core.numeric import Real, coerce
from isec.domain.base import DomainModel

Point = Union[int, str, Tuple[int, ...]]

NormKind = Literal["l1", "l2", "linf"]

NORM_ORD: Dict[str, float] = {"l1": 1, "l2": 2, "linf": np.inf}

_CDIST_METRIC: Dict[str, str] = {"l1": "cityblock", "l2": "euclidean", "linf": "chebyshev"}


def point_key(point: Point) -> str:
    """String form of a point used as a JSON object key (``(1, 2)`` -> ``"1,2"``)."""
    if isinstance(point, tuple):
        return ",".join(str(c) for c in point)
    return str(point)


def vector_norm(vector: Any, kind: NormKind) -> float:
    """Norm of a real vector."""
    return float(np.linalg.norm(np.asarray(vector, dtype=float), ord=NORM_ORD[kind]))


class FiniteMetricSpace(DomainModel):
    """A finite point set with a validated distance matrix.

    ``trusted`` skips the O(n^3) triangle check for generated instances whose
    construction guarantees it.
    """

    points: Tuple[Point, ...] = Field(..., description="Opaque point identifiers")
    dist: Tuple[Tuple[Real, ...], ...] = Field(..., description="n x n distance matrix")
    exact: bool = Field(default=False, description="Entries are exact rationals")
    trusted: bool = Field(default=False, description="Skip the triangle inequality scan")
    tolerance: float = Field(default=1e-9, gt=0, description="Float comparison slack")

    _index: Dict[Point, int] = PrivateAttr(default_factory=dict)
    _matrix: np.ndarray | None = PrivateAttr(default=None)

    @model_validator(mode="before")
    @classmethod
    def coerce_entries(cls, data: Any) -> Any:
        """Convert matrix entries into the instance's arithmetic."""
        if not isinstance(data, dict) or "dist" not in data:
            return data
        exact = bool(data.get("exact", False))
        try:
            rows = tuple(tuple(coerce(v, exact) for v in row) for row in data["dist"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"invalid distance entry: {exc}") from exc
        return {**data, "dist": rows}

    @field_validator("points")
    @classmethod
    def validate_points(cls, v: Tuple[Point, ...]) -> Tuple[Point, ...]:
        if not v:
            raise ValueError("a metric space needs at least one point")
        seen = set()
        for i, p in enumerate(v):
            if p in seen:
                raise ValueError(f"duplicate point identifier {p!r} at index {i}")
            seen.add(p)
        return v

    @model_validator(mode="after")
    def validate_metric(self) -> "FiniteMetricSpace":
        """Reject any matrix violating a metric axiom, naming the first bad index."""
        n = len(self.points)
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise ValueError(f"distance matrix must be {n} x {n}")
        tol = 0 if self.exact else self.tolerance
        for i in range(n):
            for j in range(n):
                value = self.dist[i][j]
                if not self.exact and not math.isfinite(value):
                    raise ValueError(f"non-finite distance at ({i}, {j})")
                if value < 0:
                    raise ValueError(f"negative distance at ({i}, {j})")
        for i in range(n):
            if abs(self.dist[i][i]) > tol:
                raise ValueError(f"dist[{i}][{i}] must be 0")
        for i in range(n):
            for j in range(i + 1, n):
                if abs(self.dist[i][j] - self.dist[j][i]) > tol:
                    raise ValueError(f"matrix is not symmetric at ({i}, {j})")
                if self.dist[i][j] <= tol:
                    raise ValueError(f"points {i} and {j} are not separated")
        matrix = _as_array(self.dist, self.exact)
        if not self.trusted:
            triple = _first_triangle_violation(matrix, tol)
            if triple is not None:
                i, j, k = triple
                raise ValueError(
                    f"triangle inequality violated at ({i}, {j}, {k}): "
                    f"d[{i}][{k}] > d[{i}][{j}] + d[{j}][{k}]"
                )
        self._index = {p: i for i, p in enumerate(self.points)}
        matrix.setflags(write=False)
        self._matrix = matrix
        return self

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def matrix(self) -> np.ndarray:
        """Read-only distance matrix (float64, or object dtype of Fractions)."""
        return self._matrix  # type: ignore[return-value]

    @property
    def comparison_tolerance(self) -> float:
        """Slack for inequality checks: 0 on exact instances."""
        return 0.0 if self.exact else self.tolerance

    def index_of(self, point: Point) -> int:
        try:
            return self._index[point]
        except (KeyError, TypeError):
            raise InstanceError(f"unknown point identifier {point!r}") from None

    def coerce(self, value: object) -> Real:
        """Bring a scalar (constant, radius) into this instance's arithmetic."""
        return coerce(value, self.exact)


class NormedInstance(DomainModel):
    """Finitely many sampled points of R^n with an l1, l2 or linf norm."""

    dimension: int = Field(..., gt=0)
    norm_kind: NormKind = "l2"
    vectors: Tuple[Tuple[float, ...], ...]

    @model_validator(mode="after")
    def validate_vectors(self) -> "NormedInstance":
        if not self.vectors:
            raise ValueError("a normed instance needs at least one vector")
        for i, v in enumerate(self.vectors):
            if len(v) != self.dimension:
                raise ValueError(f"vector {i} has length {len(v)}, expected {self.dimension}")
            if not all(math.isfinite(c) for c in v):
                raise ValueError(f"vector {i} has non-finite coordinates")
        return self

    def norm(self, vector: Any) -> float:
        return vector_norm(vector, self.norm_kind)

    def distance_matrix(self) -> np.ndarray:
        coords = np.asarray(self.vectors, dtype=float)
        return cdist(coords, coords, metric=_CDIST_METRIC[self.norm_kind])

    def to_metric_space(self, tolerance: float = 1e-9) -> FiniteMetricSpace:
        """The induced metric on the sampled points, identified by index."""
        matrix = self.distance_matrix()
        return FiniteMetricSpace(
            points=tuple(range(len(self.vectors))),
            dist=tuple(tuple(float(v) for v in row) for row in matrix),
            tolerance=tolerance,
        )


def _as_array(rows: Tuple[Tuple[Real, ...], ...], exact: bool) -> np.ndarray:
    if exact:
        return np.array([list(row) for row in rows], dtype=object).reshape(len(rows), len(rows))
    return np.array(rows, dtype=float).reshape(len(rows), len(rows))


def _first_triangle_violation(matrix: np.ndarray, tol: float) -> Tuple[int, int, int] | None:
    """Lexicographically first (i, j, k) with d[i][k] > d[i][j] + d[j][k]."""
    n = matrix.shape[0]
    for i in range(n):
        # bad[j, k]: going i -> j -> k is shorter than i -> k
        bad = matrix[i][None, :] > matrix[i][:, None] + matrix + tol
        hits = np.argwhere(np.asarray(bad, dtype=bool))
        if hits.size:
            j, k = hits[0]
            return i, int(j), int(k)
    return None
