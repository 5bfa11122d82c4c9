"""Deterministic instance and section factories for tests and the CLI."""

from __future__ import annotations

import itertools
import logging
from typing import Dict, Iterator, List, Literal, Sequence, Tuple

import numpy as np

from isec.core.errors import DomainError
from isec.domain.fibration import Fibration, Label, Section
from isec.domain.linear import LinearFibration, LinearSection
from isec.domain.metric import FiniteMetricSpace, Point

logger = logging.getLogger(__name__)

LatticeNorm = Literal["l1", "linf"]


def grid_instance(rows: int, cols: int, norm: LatticeNorm = "linf") -> Fibration:
    """The points (i, j), i < cols, j < rows, fibered by columns (label i).

    Points are ordered column by column, rows ascending, so the lowest point of
    every fiber comes first.
    """
    if rows < 1 or cols < 1:
        raise DomainError(f"grid needs positive rows and cols, got {rows} x {cols}")
    points: List[Point] = [(i, j) for i in range(cols) for j in range(rows)]
    dist = [[_lattice_distance(p, q, norm) for q in points] for p in points]
    space = FiniteMetricSpace(points=tuple(points), dist=dist, exact=True, trusted=True)
    return Fibration(
        space=space,
        labels=tuple(range(cols)),
        fiber_of={p: p[0] for p in points},  # type: ignore[index]
    )


def cyclic_product_instance(m: int, n: int) -> Fibration:
    """Z_m x Z_n with the word metric of the standard generators.

    Fibers are the cosets (a, Z_n), the quotient by the subgroup {0} x Z_n.
    """
    if m < 1 or n < 1:
        raise DomainError(f"cyclic orders must be positive, got {m} and {n}")
    points: List[Point] = [(a, b) for a in range(m) for b in range(n)]

    def word(p: Point, q: Point) -> int:
        da, db = abs(p[0] - q[0]), abs(p[1] - q[1])  # type: ignore[index]
        return min(da, m - da) + min(db, n - db)

    dist = [[word(p, q) for q in points] for p in points]
    space = FiniteMetricSpace(points=tuple(points), dist=dist, exact=True, trusted=True)
    return Fibration(
        space=space,
        labels=tuple(range(m)),
        fiber_of={p: p[0] for p in points},  # type: ignore[index]
    )


def random_instance(
    rng: np.random.Generator,
    fibers: int,
    max_fiber_size: int,
    dimension: int = 2,
    spread: int = 6,
    norm: LatticeNorm = "l1",
) -> Fibration:
    """Distinct random lattice points in [0, spread)^dimension, randomly fibered.

    Every fiber gets between 1 and ``max_fiber_size`` points. The metric is
    integral, so the instance is exact.
    """
    if fibers < 1 or max_fiber_size < 1:
        raise DomainError("need at least one fiber of at least one point")
    sizes = rng.integers(1, max_fiber_size + 1, size=fibers)
    total = int(sizes.sum())
    cells = spread**dimension
    if total > cells:
        raise DomainError(f"{total} points do not fit in a lattice of {cells} cells")
    flat = rng.choice(cells, size=total, replace=False)
    coords = [tuple(int(c) for c in np.unravel_index(int(f), (spread,) * dimension)) for f in flat]
    points: List[Point] = list(range(total))
    dist = [[_lattice_distance(p, q, norm) for q in coords] for p in coords]
    fiber_of: Dict[Point, Label] = {}
    start = 0
    for label, size in enumerate(sizes):
        for k in range(start, start + int(size)):
            fiber_of[k] = label
        start += int(size)
    space = FiniteMetricSpace(points=tuple(points), dist=dist, exact=True, trusted=True)
    return Fibration(space=space, labels=tuple(range(fibers)), fiber_of=fiber_of)


def _lattice_distance(p: Sequence[int], q: Sequence[int], norm: LatticeNorm) -> int:
    gaps = [abs(a - b) for a, b in zip(p, q)]
    return sum(gaps) if norm == "l1" else max(gaps)


# --- sections -------------------------------------------------------------------


def _fiber_points(fibration: Fibration, label: Label) -> List[Point]:
    indices = fibration.fiber_indices(fibration.label_index(label))
    return [fibration.space.points[i] for i in indices]


def row_section(fibration: Fibration, position: int = 0) -> Section:
    """Pick the point at ``position`` in every fiber (clamped to the fiber's size)."""
    choice = {}
    for y in fibration.labels:
        members = _fiber_points(fibration, y)
        choice[y] = members[min(position, len(members) - 1)]
    return Section(fibration=fibration, choice=choice)


def identity_row_section(fibration: Fibration) -> Section:
    """The first point of every fiber; row 0 on a grid."""
    return row_section(fibration, 0)


def zigzag_section(fibration: Fibration) -> Section:
    """First point over even label positions, last point over odd ones."""
    choice = {}
    for k, y in enumerate(fibration.labels):
        members = _fiber_points(fibration, y)
        choice[y] = members[-1] if k % 2 else members[0]
    return Section(fibration=fibration, choice=choice)


def random_section(fibration: Fibration, rng: np.random.Generator) -> Section:
    choice = {}
    for y in fibration.labels:
        members = _fiber_points(fibration, y)
        choice[y] = members[int(rng.integers(len(members)))]
    return Section(fibration=fibration, choice=choice)


def random_section_through(
    fibration: Fibration, rng: np.random.Generator, y_hat: Label, point: Point
) -> Section:
    """A random section that picks ``point`` over ``y_hat``."""
    section = random_section(fibration, rng)
    return Section(fibration=fibration, choice={**section.choice, y_hat: point})


def iter_sections(fibration: Fibration) -> Iterator[Section]:
    """Every section, in lexicographic order of the choices."""
    options = [_fiber_points(fibration, y) for y in fibration.labels]
    for picks in itertools.product(*options):
        yield Section(fibration=fibration, choice=dict(zip(fibration.labels, picks)))


def row_family(fibration: Fibration) -> Dict[Point, Section]:
    """For every point x, the row section through x (x's position in its fiber)."""
    family: Dict[Point, Section] = {}
    rows: Dict[int, Section] = {}
    for y in fibration.labels:
        for position, x in enumerate(_fiber_points(fibration, y)):
            if position not in rows:
                rows[position] = row_section(fibration, position)
            family[x] = rows[position]
    return family


# --- linear instances -------------------------------------------------------------


def linear_instance(
    A: Sequence[Sequence[float]],
    grid: Sequence[Sequence[float]] | None = None,
    grid_range: Tuple[int, int] = (-5, 5),
    norm: Literal["l1", "l2", "linf"] = "l2",
    scale: float = 1.0,
    fiber_radius: float | None = None,
) -> LinearFibration:
    """A linear fibration; without ``grid`` Y is sampled on the integer box ``grid_range``^k."""
    k = len(A)
    if grid is None:
        low, high = grid_range
        if low > high:
            raise DomainError(f"empty grid range {grid_range}")
        axis = range(low, high + 1)
        grid = [tuple(float(v) for v in y) for y in itertools.product(axis, repeat=k)]
    return LinearFibration(
        A=tuple(tuple(float(v) for v in row) for row in A),
        norm_kind=norm,
        y_grid=tuple(tuple(float(v) for v in y) for y in grid),
        scale=scale,
        fiber_radius=fiber_radius,
    )


def random_linear_fibration(
    rng: np.random.Generator,
    n: int = 3,
    k: int = 1,
    grid_size: int = 5,
    norm: Literal["l1", "l2", "linf"] = "l2",
    fiber_radius: float | None = None,
) -> LinearFibration:
    """Random full-rank A with a random integer grid of distinct points."""
    while True:
        A = rng.integers(-3, 4, size=(k, n)).astype(float)
        if np.linalg.matrix_rank(A) == k:
            break
    grid = set()
    while len(grid) < grid_size:
        grid.add(tuple(float(v) for v in rng.integers(-4, 5, size=k)))
    return LinearFibration(
        A=tuple(tuple(row) for row in A),
        norm_kind=norm,
        y_grid=tuple(sorted(grid)),
        fiber_radius=fiber_radius,
    )


def random_linear_section(
    fibration: LinearFibration,
    rng: np.random.Generator,
    spread: float = 2.0,
    anchor: Tuple[int, np.ndarray] | None = None,
) -> LinearSection:
    """choice(y) = A^+(s·y) + N·z with random z; ``anchor=(i, v)`` forces choice(y_i) = v.

    On bounded fibers the null-space part is kept inside the fiber radius.
    """
    basis = fibration.null_basis
    radius = fibration.radius
    vectors = []
    for y in fibration.grid:
        z = rng.uniform(-spread, spread, size=basis.shape[1])
        drift = basis @ z
        if radius is not None:
            length = float(np.linalg.norm(drift))
            if length > radius:
                drift = drift * (radius / length) * rng.uniform(0.0, 1.0)
        vectors.append(fibration.base_point(y) + drift)
    if anchor is not None:
        index, vector = anchor
        vectors[index] = np.asarray(vector, dtype=float)
    return LinearSection.from_array(fibration, np.asarray(vectors))
