"""Linear quotient maps between normed spaces, sampled on a grid of labels.

A ``LinearFibration`` with matrix A and scale s stands for the quotient map
(1/s)·π with π(x) = Ax; its fiber over y is the affine subspace {Ax = s·y}.
With ``fiber_radius`` R (l2 only) every fiber is truncated to the points whose
null-space component has norm at most |s|·R, so fibers have diameter 2|s|R.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from pydantic import Field, PrivateAttr, field_validator, model_validator
from scipy.linalg import null_space

from isec.domain.base import DomainModel
from isec.domain.metric import NormKind, vector_norm

# Section identity slack: A·choice(y) must equal s·y to this precision.
SECTION_ATOL = 1e-10

Vector = Tuple[float, ...]


class LinearFibration(DomainModel):
    """Full-row-rank k x n matrix A, a norm on R^n and a finite grid of y in R^k."""

    A: Tuple[Vector, ...] = Field(..., description="k x n matrix of the linear map")
    norm_kind: NormKind = "l2"
    y_grid: Tuple[Vector, ...] = Field(..., description="Sampled points of Y")
    scale: float = Field(default=1.0, description="The quotient map is (1/scale)·π")
    fiber_radius: float | None = Field(
        default=None,
        ge=0,
        description="Null-space radius R of the fibers at scale 1 (l2 only)",
    )

    _matrix: np.ndarray | None = PrivateAttr(default=None)
    _pinv: np.ndarray | None = PrivateAttr(default=None)
    _null: np.ndarray | None = PrivateAttr(default=None)
    _grid: np.ndarray | None = PrivateAttr(default=None)

    @field_validator("scale")
    @classmethod
    def validate_scale(cls, v: float) -> float:
        if not math.isfinite(v) or v == 0:
            raise ValueError("scale must be a nonzero finite number")
        return v

    @model_validator(mode="after")
    def validate_map(self) -> "LinearFibration":
        if not self.A or not self.A[0]:
            raise ValueError("A must be a nonempty k x n matrix")
        n = len(self.A[0])
        if any(len(row) != n for row in self.A):
            raise ValueError("A must be rectangular")
        k = len(self.A)
        if k > n:
            raise ValueError(f"target dimension {k} exceeds ambient dimension {n}")
        matrix = np.asarray(self.A, dtype=float)
        if not np.all(np.isfinite(matrix)):
            raise ValueError("A has non-finite entries")
        rank = int(np.linalg.matrix_rank(matrix))
        if rank != k:
            raise ValueError(f"A must have full row rank {k}, got rank {rank}")
        if not self.y_grid:
            raise ValueError("y_grid must contain at least one point")
        for i, y in enumerate(self.y_grid):
            if len(y) != k:
                raise ValueError(f"y_grid[{i}] has length {len(y)}, expected {k}")
        if len(set(self.y_grid)) != len(self.y_grid):
            raise ValueError("y_grid points must be distinct")
        if self.fiber_radius is not None and self.norm_kind != "l2":
            raise ValueError("bounded fibers are supported for the l2 norm only")

        self._matrix = matrix
        self._pinv = np.linalg.pinv(matrix)
        self._null = null_space(matrix)
        self._grid = np.asarray(self.y_grid, dtype=float).reshape(len(self.y_grid), k)
        for array in (self._matrix, self._pinv, self._null, self._grid):
            array.setflags(write=False)
        return self

    @property
    def ambient_dim(self) -> int:
        return self._matrix.shape[1]  # type: ignore[union-attr]

    @property
    def target_dim(self) -> int:
        return self._matrix.shape[0]  # type: ignore[union-attr]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix  # type: ignore[return-value]

    @property
    def pinv(self) -> np.ndarray:
        """A^T (A A^T)^-1, the minimal-norm right inverse."""
        return self._pinv  # type: ignore[return-value]

    @property
    def null_basis(self) -> np.ndarray:
        """Orthonormal basis of ker A as columns (n x (n - k))."""
        return self._null  # type: ignore[return-value]

    @property
    def grid(self) -> np.ndarray:
        return self._grid  # type: ignore[return-value]

    @property
    def radius(self) -> float | None:
        """Null-space radius of the fibers at this scale, |s|·R."""
        if self.fiber_radius is None:
            return None
        return abs(self.scale) * self.fiber_radius

    def norm(self, vector: np.ndarray) -> float:
        return vector_norm(vector, self.norm_kind)

    def project(self, x: np.ndarray) -> np.ndarray:
        """(1/s)·π(x)."""
        return self.matrix @ np.asarray(x, dtype=float) / self.scale

    def base_point(self, y: np.ndarray) -> np.ndarray:
        """The minimal-norm point A^+ (s·y) of the fiber over y."""
        return self.pinv @ (self.scale * np.asarray(y, dtype=float))

    def null_component(self, x: np.ndarray) -> np.ndarray:
        return self.null_basis @ (self.null_basis.T @ np.asarray(x, dtype=float))

    def contains(self, x: np.ndarray, y: np.ndarray, atol: float = SECTION_ATOL) -> bool:
        """True when x lies in the fiber over y."""
        x = np.asarray(x, dtype=float)
        target = self.scale * np.asarray(y, dtype=float)
        slack = atol * max(1.0, float(np.max(np.abs(target), initial=0.0)))
        if not np.allclose(self.matrix @ x, target, rtol=0.0, atol=slack):
            return False
        radius = self.radius
        if radius is None:
            return True
        return float(np.linalg.norm(self.null_component(x))) <= radius + slack

    def with_scale(self, scale: float) -> "LinearFibration":
        """The same linear map viewed as the quotient map (1/scale)·π."""
        return LinearFibration(
            A=self.A,
            norm_kind=self.norm_kind,
            y_grid=self.y_grid,
            scale=float(scale),
            fiber_radius=self.fiber_radius,
        )

    def fiber_diameter(self) -> float:
        """Diameter of every fiber: 2|s|R, or inf for affine fibers of positive dimension."""
        radius = self.radius
        if self.null_basis.shape[1] == 0:
            return 0.0
        if radius is None:
            return math.inf
        return 2.0 * radius


class LinearSection(DomainModel):
    """A vector per grid point with A·choice[i] = s·y_grid[i]."""

    fibration: LinearFibration
    choice: Tuple[Vector, ...] = Field(..., description="Vectors aligned with y_grid")

    _vectors: np.ndarray | None = PrivateAttr(default=None)

    @model_validator(mode="after")
    def validate_choice(self) -> "LinearSection":
        fibration = self.fibration
        if len(self.choice) != len(fibration.y_grid):
            raise ValueError(
                f"section has {len(self.choice)} vectors for {len(fibration.y_grid)} grid points"
            )
        n = fibration.ambient_dim
        for i, (x, y) in enumerate(zip(self.choice, fibration.y_grid)):
            if len(x) != n:
                raise ValueError(f"choice[{i}] has length {len(x)}, expected {n}")
            if not fibration.contains(np.asarray(x), np.asarray(y)):
                raise ValueError(
                    f"choice[{i}] does not lie in the fiber over y_grid[{i}] "
                    f"at scale {fibration.scale}"
                )
        vectors = np.asarray(self.choice, dtype=float).reshape(len(self.choice), n)
        vectors.setflags(write=False)
        self._vectors = vectors
        return self

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors  # type: ignore[return-value]

    @classmethod
    def from_array(cls, fibration: LinearFibration, vectors: np.ndarray) -> "LinearSection":
        rows = tuple(tuple(float(c) for c in row) for row in np.asarray(vectors, dtype=float))
        return cls(fibration=fibration, choice=rows)
