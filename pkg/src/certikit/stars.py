"""Hollow-star machinery: verification, exhaustive computation of the
b-robust hollow star number for finite families, the constructive budget
lift, and the hardest-instance generator.

A b-robust hollow star is a labeled sequence that stops being b-robustly
realizable once one designated element is given weight b+1, yet becomes
realizable again when any single (weighted) element is removed.  The size of
the largest such star, minus one, equals the worst-case minimum certificate
size, which is what makes these objects worth searching for.

The search enumerates multisets of (point, label) pairs with per-pair
multiplicity at most ``multiplicity_cap`` (default b+1: the known
constructions never need more, and whether more can ever help is an open
question, so results are "under the cap" with the singletons closed form as
the exactness anchor).  Candidate filtering is vectorized over the family's
pair-error matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .domain import (
    Dataset,
    LabeledExample,
    Point,
    dpoint,
    flip,
    weighted_view,
)
from .errors import CapacityError, InputError
from .hypoclasses import FiniteFamily, HypothesisFamily
from .oracles import (
    is_certificate,
    is_minimal_certificate,
    is_robustly_realizable,
)

STAR_GRID_GUARD = 2**22


@dataclass(frozen=True)
class HollowStar:
    elements: Tuple[LabeledExample, ...]
    heavy_index: int
    budget: int
    verified: bool = False

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not (0 <= self.heavy_index < len(self.elements)):
            raise InputError("heavy_index out of range")
        if self.budget < 0:
            raise InputError("budget must be >= 0")

    @property
    def size(self) -> int:
        return len(self.elements)

    def dataset(self) -> Dataset:
        return Dataset(self.elements)


def verify_star(family: HypothesisFamily, star: HollowStar) -> bool:
    """Check the two behavioral star conditions: the weighted sequence (heavy
    element at weight b+1) is not b-robustly realizable, and every
    single-element removal is."""
    b = star.budget
    weighted = weighted_view(star.dataset(), star.heavy_index, b + 1)
    if is_robustly_realizable(family, weighted, b):
        return False
    for i in range(star.size):
        rest = weighted[:i] + weighted[i + 1 :]
        if not is_robustly_realizable(family, rest, b):
            return False
    return True


def lift_star(star: HollowStar, b: int) -> HollowStar:
    """Lift a verified budget-0 star to budget b: b+1 copies of the body
    (everything but the heavy element) followed by the heavy element."""
    if star.budget != 0:
        raise InputError("lift_star expects a budget-0 star")
    if not star.verified:
        raise InputError("lift_star expects a verified star")
    if b < 0:
        raise InputError("budget must be >= 0")
    if b == 0:
        return star
    heavy = star.elements[star.heavy_index]
    body = tuple(ex for i, ex in enumerate(star.elements) if i != star.heavy_index)
    elements = body * (b + 1) + (heavy,)
    return HollowStar(elements, heavy_index=len(elements) - 1, budget=b, verified=True)


def _pair_points(family: FiniteFamily) -> Tuple[Tuple[Point, int], ...]:
    """(point, label) pairs in the layout of FiniteFamily.pair_errors."""
    plus = tuple((dpoint(pid), 1) for pid in family.domain_ids)
    minus = tuple((dpoint(pid), -1) for pid in family.domain_ids)
    return plus + minus


def _count_grid(num_pairs: int, cap: int) -> np.ndarray:
    """All multiplicity vectors in {0..cap}^num_pairs, lexicographic order."""
    if (cap + 1) ** num_pairs > STAR_GRID_GUARD:
        raise CapacityError(
            f"star search grid ({cap + 1}^{num_pairs}) exceeds guard {STAR_GRID_GUARD}"
        )
    grid = np.array(
        list(itertools.product(range(cap + 1), repeat=num_pairs)), dtype=np.int64
    )
    return grid


def _min_errors(E: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Minimum weighted error over hypotheses, per weight-vector row."""
    return (E @ weights.T).min(axis=0)


def _expand_star(pairs, counts, heavy_pair, b) -> HollowStar:
    elements = []
    for j, (point, label) in enumerate(pairs):
        copies = int(counts[j]) - (1 if j == heavy_pair else 0)
        elements.extend([LabeledExample(point, label)] * copies)
    point, label = pairs[heavy_pair]
    elements.append(LabeledExample(point, label))
    return HollowStar(
        tuple(elements), heavy_index=len(elements) - 1, budget=b, verified=True
    )


def robust_star_number(
    family: FiniteFamily,
    b: int,
    multiplicity_cap: Optional[int] = None,
    size_cap: Optional[int] = None,
) -> Tuple[int, Optional[HollowStar]]:
    """Largest verified b-robust hollow star under the multiplicity cap.

    Searches sizes in decreasing order; within a size, heavy-pair choice is
    iterated outermost and candidates in lexicographic order, so the witness
    is deterministic.  For b > 0 the lift of the best budget-0 star provides
    the floor below which no search is needed.
    """
    if not isinstance(family, FiniteFamily):
        raise InputError("star search is implemented for finite families only")
    if b < 0:
        raise InputError("budget must be >= 0")
    cap = multiplicity_cap if multiplicity_cap is not None else b + 1
    if cap < 1:
        raise InputError("multiplicity_cap must be >= 1")
    max_total = 2 * family.domain_size * cap
    top = min(size_cap, max_total) if size_cap is not None else min(
        (b + 1) * family.domain_size * 2, max_total
    )

    pairs = _pair_points(family)
    E = family.pair_errors()
    grid = _count_grid(len(pairs), cap)
    sizes = grid.sum(axis=1)

    floor = 0
    floor_witness: Optional[HollowStar] = None
    if b > 0:
        s0, star0 = robust_star_number(family, 0, multiplicity_cap=1)
        if star0 is not None:
            lifted = lift_star(star0, b)
            floor = lifted.size
            floor_witness = lifted

    for size in range(top, floor, -1):
        C = grid[sizes == size]
        if C.shape[0] == 0:
            continue
        for p in range(len(pairs)):
            present = C[:, p] >= 1
            if not present.any():
                continue
            cand = C[present]
            heavy_weights = cand.astype(np.float64)
            heavy_weights[:, p] += b
            # condition: weighted sequence (heavy at b+1) not realizable
            alive = _min_errors(E, heavy_weights) > b + 0.5
            if not alive.any():
                continue
            cand = cand[alive]
            heavy_weights = heavy_weights[alive]
            # condition: every single-element removal realizable
            ok = np.ones(cand.shape[0], dtype=bool)
            # removing the heavy element leaves all-unit weights
            body = cand.astype(np.float64)
            body[:, p] -= 1
            ok &= _min_errors(E, body) <= b + 0.5
            for q in range(len(pairs)):
                removable = cand[:, q] >= (2 if q == p else 1)
                if not removable.any():
                    continue
                w = heavy_weights[removable].copy()
                w[:, q] -= 1
                sub_ok = _min_errors(E, w) <= b + 0.5
                rows = np.flatnonzero(removable)
                ok[rows[~sub_ok]] = False
            hits = np.flatnonzero(ok)
            if hits.size:
                counts = cand[hits[0]]
                return size, _expand_star(pairs, counts, p, b)

    if floor > 0:
        return floor, floor_witness
    return 0, None


def hardest_instance(
    family: HypothesisFamily, star: HollowStar
) -> Tuple[Dataset, Point, int]:
    """Dataset/test/label triple on which no certificate smaller than the
    whole dataset exists: the star minus its heavy element, tested at the
    heavy point with the flipped label."""
    if not star.verified and not verify_star(family, star):
        raise InputError("hardest_instance requires a verified hollow star")
    heavy = star.elements[star.heavy_index]
    rest = tuple(ex for i, ex in enumerate(star.elements) if i != star.heavy_index)
    data = Dataset(rest)
    test, label = heavy.point, flip(heavy.label)
    idx = list(range(len(data)))
    if not is_minimal_certificate(family, data, idx, star.budget, test, label):
        raise InputError("star instance failed post-verification")
    return data, test, label


def largest_minimal_certificate(
    family: FiniteFamily,
    b: int,
    multiplicity_cap: Optional[int] = None,
    size_cap: Optional[int] = None,
) -> Tuple[int, Optional[Tuple[Dataset, Point, int]]]:
    """Worst-case minimal certificate size over all datasets and test pairs,
    by exhaustive multiset enumeration (finite families, desk scale).

    A minimal certificate never needs more than b+1 copies of one
    (point, label) pair: with b+2 copies, dropping one still forces any
    within-budget hypothesis to agree on that pair, so the certificate was
    not minimal.  Multiplicity b+1 is therefore exhaustive here.
    """
    if not isinstance(family, FiniteFamily):
        raise InputError("exhaustive scan is implemented for finite families only")
    cap = multiplicity_cap if multiplicity_cap is not None else b + 1
    top = size_cap if size_cap is not None else 2 * family.domain_size * cap

    pairs = _pair_points(family)
    E = family.pair_errors()
    grid = _count_grid(len(pairs), cap)
    sizes = grid.sum(axis=1)

    for size in range(min(top, int(sizes.max(initial=0))), 0, -1):
        C = grid[sizes == size].astype(np.float64)
        if C.shape[0] == 0:
            continue
        realizable = _min_errors(E, C) <= b + 0.5
        C = C[realizable]
        if C.shape[0] == 0:
            continue
        for t, (point, label) in enumerate(pairs):
            tflip = (t + family.domain_size) % (2 * family.domain_size)
            w_agree = C.copy()
            w_agree[:, tflip] += b + 1
            # in agreement iff the flipped-test weighted sequence is unrealizable
            agreeing = _min_errors(E, w_agree) > b + 0.5
            if not agreeing.any():
                continue
            cand = C[agreeing]
            w_cand = w_agree[agreeing]
            minimal = np.ones(cand.shape[0], dtype=bool)
            for q in range(len(pairs)):
                removable = cand[:, q] >= 1
                if not removable.any():
                    continue
                w = w_cand[removable].copy()
                w[:, q] -= 1
                # drop still certifies iff flipped-test sequence stays unrealizable
                still = _min_errors(E, w) > b + 0.5
                rows = np.flatnonzero(removable)
                minimal[rows[still]] = False
            hits = np.flatnonzero(minimal)
            if hits.size:
                counts = cand[hits[0]]
                elements = []
                for j, (p_pt, p_lb) in enumerate(pairs):
                    elements.extend([LabeledExample(p_pt, p_lb)] * int(counts[j]))
                return size, (Dataset(tuple(elements)), point, label)
    return 0, None
