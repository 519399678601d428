"""Concrete hypothesis families and their query primitives.

Finite families are stored dense as an H x N sign matrix (rows pairwise
distinct), which makes mistake counting a vectorizable inner loop.
Halfspaces use the sign-at-zero convention: prediction is +1 when
``w . x == 0``.  Affine halfspaces are realized as homogeneous halfspaces in
d+1 dimensions via the lift ``x -> (x, 1)``; there is no separate code path.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .domain import Dataset, LabeledExample, Point, WeightedExample, dpoint
from .errors import CapacityError, InputError

Hypothesis = Union[int, Sequence[float], np.ndarray]

TIGHTNESS_FAMILY_GUARD = 10**7


class HypothesisFamily:
    """Behavioral contract shared by all families."""

    kind: str = "abstract"

    def predict(self, hypothesis: Hypothesis, point: Point) -> int:
        raise NotImplementedError

    def vc_dimension(self) -> int:
        raise NotImplementedError


class FiniteFamily(HypothesisFamily):
    """Finite enumerated family over a discrete domain.

    ``matrix[h, j]`` is the +-1 prediction of hypothesis ``h`` on the domain
    point whose id is ``domain_ids[j]``.
    """

    def __init__(self, domain_ids, matrix, kind="finite-enumerated", vc_hint=None):
        self.domain_ids = tuple(int(i) for i in domain_ids)
        self.matrix = np.asarray(matrix, dtype=np.int8)
        if self.matrix.ndim != 2 or self.matrix.shape[1] != len(self.domain_ids):
            raise InputError("sign matrix shape does not match domain")
        if not np.all(np.abs(self.matrix) == 1):
            raise InputError("sign matrix entries must be +1/-1")
        rows = {tuple(r) for r in self.matrix.tolist()}
        if len(rows) != self.matrix.shape[0]:
            raise InputError("finite family rows must be pairwise distinct")
        self.kind = kind
        self._col = {pid: j for j, pid in enumerate(self.domain_ids)}
        self._vc_hint = vc_hint
        # error indicators over (point, label) pairs, laid out +1-pairs then
        # -1-pairs; used by the weighted-error kernel and the star search
        self._pair_errors = np.concatenate(
            [(self.matrix != 1), (self.matrix != -1)], axis=1
        ).astype(np.float64)

    @property
    def num_hypotheses(self) -> int:
        return self.matrix.shape[0]

    @property
    def domain_size(self) -> int:
        return len(self.domain_ids)

    @property
    def ambient(self) -> int:
        return self.domain_size

    def hypotheses(self) -> range:
        return range(self.num_hypotheses)

    def column(self, point: Point) -> int:
        if not point.is_discrete:
            raise InputError("finite families are defined over discrete points")
        j = self._col.get(point.discrete)
        if j is None:
            raise InputError(f"point {point.discrete} not in family domain")
        return j

    def predict(self, hypothesis: Hypothesis, point: Point) -> int:
        h = int(hypothesis)
        if not (0 <= h < self.num_hypotheses):
            raise InputError(f"hypothesis index {h} out of range")
        return int(self.matrix[h, self.column(point)])

    def pair_index(self, point: Point, label: int) -> int:
        """Index of (point, label) in the pair layout used by ``pair_errors``."""
        j = self.column(point)
        return j if label == 1 else j + self.domain_size

    def pair_errors(self) -> np.ndarray:
        """(H, 2N) 0/1 matrix: entry 1 iff the hypothesis mislabels the pair."""
        return self._pair_errors

    def weighted_error_counts(self, weighted: Sequence[WeightedExample]) -> np.ndarray:
        """Exact weighted mistake count of every hypothesis, vectorized."""
        w = np.zeros(2 * self.domain_size)
        for ex in weighted:
            w[self.pair_index(ex.point, ex.label)] += ex.weight
        return self._pair_errors @ w

    def vc_dimension(self) -> int:
        if self._vc_hint is not None:
            return self._vc_hint
        d = _vc_by_shattering(self.matrix)
        self._vc_hint = d
        return d

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.domain_ids)
            for row in self.matrix:
                writer.writerow([int(v) for v in row])


def _vc_by_shattering(matrix: np.ndarray, guard: int = 10**6) -> int:
    """Largest shattered subset of columns, by exhaustive search."""
    n_h, n = matrix.shape
    max_d = min(n, int(math.log2(n_h)) if n_h > 1 else 0)
    vc = 0
    for d in range(1, max_d + 1):
        if math.comb(n, d) * (2**d) > guard:
            raise CapacityError(f"shattering search too large at d={d}")
        shattered = False
        for cols in itertools.combinations(range(n), d):
            patterns = {tuple(row) for row in matrix[:, cols].tolist()}
            if len(patterns) == 2**d:
                shattered = True
                break
        if shattered:
            vc = d
        else:
            break
    return vc


def finite_family_from_csv(path) -> FiniteFamily:
    """First row: domain point ids; each later row: one hypothesis' +-1 labels."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise InputError("family file needs a domain row and at least one hypothesis")
    ids = [int(v) for v in rows[0]]
    matrix = [[int(v) for v in r] for r in rows[1:]]
    return FiniteFamily(ids, matrix)


def singletons(n: int) -> FiniteFamily:
    """Hypothesis i labels only point i positively, over domain ids 1..n."""
    if n < 1:
        raise InputError("singletons domain size must be >= 1")
    matrix = -np.ones((n, n), dtype=np.int8)
    np.fill_diagonal(matrix, 1)
    return FiniteFamily(range(1, n + 1), matrix, kind="singletons", vc_hint=1)


def tightness_family(d: int, k: int) -> FiniteFamily:
    """Family over domain ids {0, ..., k} used in sample-complexity lower-bound
    experiments: one hypothesis per d-subset S of {1..k} labeling exactly S
    positive, plus one special hypothesis labeling exactly point 0 positive.
    VC dimension is exactly d."""
    if not (1 <= d <= k):
        raise InputError("need k >= d >= 1")
    count = math.comb(k, d)
    if count > TIGHTNESS_FAMILY_GUARD:
        raise CapacityError(f"C({k},{d}) = {count} exceeds enumeration guard")
    matrix = -np.ones((count + 1, k + 1), dtype=np.int8)
    for row, subset in enumerate(itertools.combinations(range(1, k + 1), d)):
        matrix[row, list(subset)] = 1
    matrix[count, 0] = 1
    return FiniteFamily(range(k + 1), matrix, vc_hint=d)


class HalfspaceFamily(HypothesisFamily):
    """Halfspaces ``x -> sign(w . x)`` with sign(0) = +1.

    ``affine=True`` lifts points to (x, 1), so parameters live in d+1 dims.
    """

    def __init__(self, dim: int, affine: bool = False):
        if dim < 1:
            raise InputError("halfspace dimension must be >= 1")
        self.dim = int(dim)
        self.affine = bool(affine)
        self.kind = "halfspace-affine" if affine else "halfspace-homogeneous"

    @property
    def ambient(self) -> int:
        return self.dim

    @property
    def lifted_dim(self) -> int:
        return self.dim + 1 if self.affine else self.dim

    def lift(self, point: Point) -> np.ndarray:
        x = point.as_array()
        if x.shape[0] != self.dim:
            raise InputError(f"point dimension {x.shape[0]} != family dimension {self.dim}")
        return np.append(x, 1.0) if self.affine else x

    def lift_matrix(self, points: Sequence[Point]) -> np.ndarray:
        if not points:
            return np.zeros((0, self.lifted_dim))
        return np.stack([self.lift(p) for p in points])

    def predict(self, hypothesis: Hypothesis, point: Point) -> int:
        w = np.asarray(hypothesis, dtype=float)
        if w.shape != (self.lifted_dim,):
            raise InputError(f"parameter must have shape ({self.lifted_dim},)")
        return 1 if float(w @ self.lift(point)) >= 0.0 else -1

    def vc_dimension(self) -> int:
        return self.lifted_dim


@dataclass(frozen=True)
class TargetHypothesis:
    """One designated hypothesis of a family (the labeling target)."""

    family: HypothesisFamily
    hypothesis: Union[int, Tuple[float, ...]]

    def __post_init__(self):
        if isinstance(self.family, FiniteFamily):
            h = int(self.hypothesis)
            if not (0 <= h < self.family.num_hypotheses):
                raise InputError(f"hypothesis index {h} out of range")
            object.__setattr__(self, "hypothesis", h)
        else:
            object.__setattr__(
                self, "hypothesis", tuple(float(v) for v in self.hypothesis)
            )

    def predict(self, point: Point) -> int:
        return self.family.predict(self.hypothesis, point)


def predict(family: HypothesisFamily, hypothesis: Hypothesis, point: Point) -> int:
    return family.predict(hypothesis, point)


def label_dataset(
    family: HypothesisFamily, target: TargetHypothesis, points: Iterable[Point]
) -> Dataset:
    """Label each point by the target hypothesis."""
    examples = tuple(LabeledExample(p, target.predict(p)) for p in points)
    return Dataset(examples)
