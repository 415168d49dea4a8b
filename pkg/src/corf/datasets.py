"""Core data containers: the primary dataset and the co-data design.

Co-data is side information on the *variables* of the primary dataset
(one row per variable), never on the samples, and never derived from the
primary response labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

NOMINAL = "nominal"
CONTINUOUS = "continuous"

INCREASING = "increasing"
DECREASING = "decreasing"
NONE = "none"


@dataclass
class PrimaryDataset:
    """An n x P variable matrix with binary response labels.

    Parameters
    ----------
    X : ndarray (n, P)
        Real-valued variable matrix, all entries finite.
    y : ndarray (n,)
        Binary labels in {0, 1}.
    variable_ids : list of str
        Unique identifier per column of X.
    sample_ids : list of str
        Identifier per row of X.
    """

    X: np.ndarray
    y: np.ndarray
    variable_ids: list[str]
    sample_ids: list[str]

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        n, p = self.X.shape
        if n < 2:
            raise InputError("need at least 2 samples")
        if p < 1:
            raise InputError("need at least 1 variable")
        if self.y.shape != (n,):
            raise ValueError(f"y has shape {self.y.shape}, expected ({n},)")
        if not np.isin(self.y, (0, 1)).all():
            raise InputError("y must contain only 0/1 labels")
        self.y = self.y.astype(np.int8)
        if not np.isfinite(self.X).all():
            bad = np.argwhere(~np.isfinite(self.X))[0]
            raise InputError(
                f"non-finite value at (row {bad[0]}, col {bad[1]}) of X"
            )
        if len(self.variable_ids) != p:
            raise ValueError("variable_ids length must match column count")
        if len(set(self.variable_ids)) != p:
            raise InputError("variable_ids must be unique")
        if len(self.sample_ids) != n:
            raise ValueError("sample_ids length must match row count")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def P(self) -> int:
        return self.X.shape[1]


@dataclass
class CoDataColumn:
    """One co-data feature: a value per primary variable.

    ``kind`` is "nominal" (values are integer indices into ``levels``) or
    "continuous" (values are reals). A monotonicity direction may only be
    declared on continuous columns; it constrains the fitted smooth.
    """

    name: str
    kind: str
    values: np.ndarray
    levels: list[str] | None = None
    monotonicity: str = NONE

    def __post_init__(self):
        if self.kind not in (NOMINAL, CONTINUOUS):
            raise ValueError(f"unknown co-data kind {self.kind!r}")
        if self.monotonicity not in (INCREASING, DECREASING, NONE):
            raise ValueError(f"unknown monotonicity {self.monotonicity!r}")
        if self.kind == NOMINAL:
            if self.monotonicity != NONE:
                raise InputError(
                    f"column {self.name!r}: monotonicity declared on a "
                    "nominal column"
                )
            if self.levels is None or len(self.levels) < 2:
                raise InputError(
                    f"column {self.name!r}: nominal co-data needs >= 2 levels"
                )
            self.values = np.asarray(self.values, dtype=np.int64)
            if self.values.min() < 0 or self.values.max() >= len(self.levels):
                raise InputError(
                    f"column {self.name!r}: level index out of range"
                )
        else:
            self.values = np.asarray(self.values, dtype=np.float64)
            if not np.isfinite(self.values).all():
                raise InputError(
                    f"column {self.name!r}: non-finite continuous co-data"
                )


@dataclass
class CoDataDesign:
    """A collection of co-data columns, aligned to the primary variables."""

    columns: list[CoDataColumn]
    P: int

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise InputError("co-data column names must be unique")
        for c in self.columns:
            if len(c.values) != self.P:
                raise ValueError(
                    f"column {c.name!r} has {len(c.values)} rows, "
                    f"expected {self.P}"
                )

    @property
    def C(self) -> int:
        return len(self.columns)

    def schema(self) -> list[tuple[str, str, str]]:
        """(name, kind, monotonicity) triples, used for compatibility checks."""
        return [(c.name, c.kind, c.monotonicity) for c in self.columns]


@dataclass
class GroupingCoData:
    """An a-priori partition of the variables into groups.

    ``group_of`` holds one hashable label per variable; ``group_sizes``
    is derived. Every group must be nonempty by construction.
    """

    group_of: list
    group_labels: list = field(init=False)
    group_sizes: dict = field(init=False)

    def __post_init__(self):
        if len(self.group_of) == 0:
            raise ValueError("empty grouping")
        self.group_labels = sorted(set(self.group_of), key=str)
        self.group_sizes = {
            g: sum(1 for x in self.group_of if x == g)
            for g in self.group_labels
        }

    @property
    def P(self) -> int:
        return len(self.group_of)
