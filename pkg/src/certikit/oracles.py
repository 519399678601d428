"""Decision primitives: robust realizability (plain and weighted),
robust-agreement membership, and certificate validity/minimality.

Agreement is decided through one encoding everywhere: append the test point
with the opposite label at weight b+1 and ask whether the weighted sequence
is still b-robustly realizable.  A hypothesis predicting the claimed label
pays b+1 on the appended point, so the weighted sequence is realizable
exactly when some within-budget hypothesis disagrees at the test point.

Backends: finite families enumerate hypotheses over the dense sign matrix;
halfspaces enumerate deletion subsets (total weight <= b, smallest first)
and run the consistency LP on the remainder.  First-witness selection is by
lowest index, so answers are deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .conic import halfspace_consistency_lp
from .domain import (
    Dataset,
    LabeledExample,
    Point,
    WeightedExample,
    flip,
    plain_weights,
    subsequence,
    weighted_view,
)
from .errors import CapacityError, InputError
from .hypoclasses import FiniteFamily, HalfspaceFamily, HypothesisFamily

DELETION_GUARD_DEFAULT = 10**6

WeightedSeq = Sequence[WeightedExample]


@dataclass(frozen=True)
class RealizabilityResult:
    realizable: bool
    witness: Optional[Union[int, Tuple[float, ...]]] = None

    def __bool__(self) -> bool:
        return self.realizable


def _as_weighted(data) -> Tuple[WeightedExample, ...]:
    if isinstance(data, Dataset):
        return plain_weights(data)
    return tuple(data)


def weighted_error(family: HypothesisFamily, hypothesis, weighted: WeightedSeq) -> int:
    """Exact weighted mistake count of one hypothesis."""
    total = 0
    for ex in weighted:
        if family.predict(hypothesis, ex.point) != ex.label:
            total += ex.weight
    return total


def is_robustly_realizable(
    family: HypothesisFamily,
    weighted: WeightedSeq,
    b: int,
    guard: int = DELETION_GUARD_DEFAULT,
) -> RealizabilityResult:
    """Does some hypothesis make at most b weighted mistakes on the sequence?"""
    if b < 0:
        raise InputError("budget b must be >= 0")
    weighted = _as_weighted(weighted)
    if isinstance(family, FiniteFamily):
        return _realizable_finite(family, weighted, b)
    if isinstance(family, HalfspaceFamily):
        return _realizable_halfspace(family, weighted, b, guard)
    raise InputError(f"no realizability backend for family kind {family.kind!r}")


def _realizable_finite(family, weighted, b) -> RealizabilityResult:
    errors = family.weighted_error_counts(weighted)
    hits = np.flatnonzero(errors <= b + 0.5)
    if hits.size == 0:
        return RealizabilityResult(False)
    return RealizabilityResult(True, int(hits[0]))


def _deletion_sets(weights: Sequence[int], b: int, guard: int):
    """Subsets of indices with total weight <= b, by (size, lex) order."""
    deletable = [i for i, w in enumerate(weights) if w <= b]
    total = sum(math.comb(len(deletable), s) for s in range(0, b + 1))
    if total > guard:
        raise CapacityError(
            f"deletion enumeration needs {total} subsets (guard {guard})"
        )
    for size in range(0, b + 1):
        for combo in itertools.combinations(deletable, size):
            if sum(weights[i] for i in combo) <= b:
                yield combo


def _realizable_halfspace(family, weighted, b, guard) -> RealizabilityResult:
    points = family.lift_matrix([ex.point for ex in weighted])
    labels = np.array([ex.label for ex in weighted], dtype=np.int8)
    weights = [ex.weight for ex in weighted]
    n = len(weighted)
    for deleted in _deletion_sets(weights, b, guard):
        keep = np.ones(n, dtype=bool)
        keep[list(deleted)] = False
        pos = points[keep & (labels == 1)]
        neg = points[keep & (labels == -1)]
        feasible, w = halfspace_consistency_lp(pos, neg)
        if feasible:
            return RealizabilityResult(True, tuple(float(v) for v in w))
    return RealizabilityResult(False)


def disagreement_witness(
    family: HypothesisFamily,
    data: Dataset,
    b: int,
    test: Point,
    label: int,
    guard: int = DELETION_GUARD_DEFAULT,
) -> RealizabilityResult:
    """Search for a hypothesis within budget b on ``data`` that predicts the
    opposite of ``label`` at ``test``.  Realizable means agreement FAILS."""
    appended = Dataset(data.examples + (LabeledExample(test, flip(label)),))
    weighted = weighted_view(appended, heavy_index=len(appended) - 1, heavy_weight=b + 1)
    return is_robustly_realizable(family, weighted, b, guard=guard)


def in_robust_agreement(
    family: HypothesisFamily,
    data: Dataset,
    b: int,
    test: Point,
    label: int,
    guard: int = DELETION_GUARD_DEFAULT,
) -> bool:
    """Does every hypothesis with at most b mistakes on ``data`` predict
    ``label`` at ``test``?"""
    return not disagreement_witness(family, data, b, test, label, guard=guard)


def is_certificate(
    family: HypothesisFamily,
    data: Dataset,
    indices: Sequence[int],
    b: int,
    test: Point,
    label: int,
    trusted_superset: bool = False,
    guard: int = DELETION_GUARD_DEFAULT,
) -> bool:
    """Both certificate conditions on the selected subsequence: it is
    b-robustly realizable, and (test, label) lies in its b-robust agreement
    region.

    ``trusted_superset`` skips the realizability check; valid when the
    subsequence comes from a dataset already known to be b-robustly
    realizable (realizability is monotone under taking subsequences).
    """
    sub = subsequence(data, indices)
    if not trusted_superset:
        if not is_robustly_realizable(family, plain_weights(sub), b, guard=guard):
            return False
    return in_robust_agreement(family, sub, b, test, label, guard=guard)


def is_minimal_certificate(
    family: HypothesisFamily,
    data: Dataset,
    indices: Sequence[int],
    b: int,
    test: Point,
    label: int,
    guard: int = DELETION_GUARD_DEFAULT,
) -> bool:
    """A certificate no single index of which can be dropped.

    Certification is monotone under supersets of a realizable sequence, so
    if every single-drop fails then every proper subset fails.
    """
    idx = sorted(set(indices))
    if not is_certificate(family, data, idx, b, test, label, guard=guard):
        return False
    for i in idx:
        rest = [j for j in idx if j != i]
        # dropping from a realizable sequence preserves realizability
        if is_certificate(
            family, data, rest, b, test, label, trusted_superset=True, guard=guard
        ):
            return False
    return True
