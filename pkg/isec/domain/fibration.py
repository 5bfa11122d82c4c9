"""Quotient maps as fiber partitions, and sections of them."""

from __future__ import annotations

import math
from typing import Dict, List, Tuple, Union

import numpy as np
from pydantic import Field, PrivateAttr, model_validator

from isec.core.errors import InstanceError
from isec.core.numeric import Real
from isec.domain.base import DomainModel
from isec.domain.metric import FiniteMetricSpace, Point

Label = Union[int, str]


class Fibration(DomainModel):
    """A partition of ``space`` into nonempty fibers indexed by ``labels``.

    ``fiber_of`` is the quotient map; ``measure`` optionally weights the labels.
    """

    space: FiniteMetricSpace
    labels: Tuple[Label, ...] = Field(..., description="The finite space Y")
    fiber_of: Dict[Point, Label] = Field(..., description="The quotient map, point -> label")
    measure: Dict[Label, Real] | None = Field(
        default=None,
        description="Nonnegative weight per label",
    )

    _label_index: Dict[Label, int] = PrivateAttr(default_factory=dict)
    _assignment: np.ndarray | None = PrivateAttr(default=None)
    _fibers: List[np.ndarray] = PrivateAttr(default_factory=list)
    _fiber_distance: np.ndarray | None = PrivateAttr(default=None)

    @model_validator(mode="after")
    def validate_partition(self) -> "Fibration":
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        known = set(self.labels)
        for point in self.space.points:
            if point not in self.fiber_of:
                raise ValueError(f"point {point!r} has no label")
        sizes = dict.fromkeys(self.labels, 0)
        for point, label in self.fiber_of.items():
            if point not in self.space._index:
                raise ValueError(f"fiber_of names unknown point {point!r}")
            if label not in known:
                raise ValueError(f"point {point!r} maps to unknown label {label!r}")
            sizes[label] += 1
        for label, size in sizes.items():
            if size == 0:
                raise ValueError(f"fiber over {label!r} is empty")
        if self.measure is not None:
            if set(self.measure) != known:
                raise ValueError("measure must weight every label exactly once")
            for label, weight in self.measure.items():
                if isinstance(weight, float) and not math.isfinite(weight):
                    raise ValueError(f"weight of {label!r} is not finite")
                if weight < 0:
                    raise ValueError(f"weight of {label!r} is negative")
        self._label_index = {y: j for j, y in enumerate(self.labels)}
        assignment = np.array(
            [self._label_index[self.fiber_of[p]] for p in self.space.points], dtype=int
        )
        self._assignment = assignment
        self._fibers = [np.flatnonzero(assignment == j) for j in range(len(self.labels))]
        return self

    def label_index(self, label: Label) -> int:
        try:
            return self._label_index[label]
        except (KeyError, TypeError):
            raise InstanceError(f"unknown label {label!r}") from None

    def label_of_index(self, point_index: int) -> int:
        """Label index of the fiber containing the point with this index."""
        return int(self._assignment[point_index])  # type: ignore[index]

    def fiber_indices(self, label_index: int) -> np.ndarray:
        return self._fibers[label_index]

    def fiber_distances(self) -> np.ndarray:
        """n x |Y| matrix of d(x, fiber(y)), computed once."""
        if self._fiber_distance is None:
            matrix = self.space.matrix
            columns = [matrix[:, fiber].min(axis=1) for fiber in self._fibers]
            table = np.stack(columns, axis=1)
            table.setflags(write=False)
            self._fiber_distance = table
        return self._fiber_distance

    def weights(self) -> np.ndarray | None:
        """Label weights aligned with ``labels``, or None without a measure."""
        if self.measure is None:
            return None
        dtype = object if self.space.exact else float
        return np.array([self.measure[y] for y in self.labels], dtype=dtype)

    def with_counting_measure(self) -> "Fibration":
        """This fibration weighted by counting measure on the labels."""
        return Fibration(
            space=self.space,
            labels=self.labels,
            fiber_of=self.fiber_of,
            measure={y: self.space.coerce(1) for y in self.labels},
        )

    def same_partition(self, other: "Fibration") -> bool:
        """True when both describe the same quotient map on the same space."""
        return self is other or (
            self.labels == other.labels
            and self.fiber_of == other.fiber_of
            and self.space == other.space
        )


class Section(DomainModel):
    """A choice of one point in every fiber: ``fiber_of(choice[y]) == y``."""

    fibration: Fibration
    choice: Dict[Label, Point] = Field(..., description="label -> chosen point")

    _indices: np.ndarray | None = PrivateAttr(default=None)

    @model_validator(mode="after")
    def validate_choice(self) -> "Section":
        fibration = self.fibration
        missing = [y for y in fibration.labels if y not in self.choice]
        if missing:
            raise ValueError(f"section is not total: no point chosen over {missing[0]!r}")
        for label, point in self.choice.items():
            if label not in fibration._label_index:
                raise ValueError(f"section chooses over unknown label {label!r}")
            if point not in fibration.fiber_of:
                raise ValueError(f"section chooses unknown point {point!r}")
            if fibration.fiber_of[point] != label:
                raise ValueError(
                    f"choice over {label!r} is {point!r}, which lies over "
                    f"{fibration.fiber_of[point]!r}"
                )
        space = fibration.space
        self._indices = np.array(
            [space.index_of(self.choice[y]) for y in fibration.labels], dtype=int
        )
        return self

    @property
    def space(self) -> FiniteMetricSpace:
        return self.fibration.space

    @property
    def indices(self) -> np.ndarray:
        """Point index of the chosen point, per label index."""
        return self._indices  # type: ignore[return-value]
