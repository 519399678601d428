"""Label-corruption models with budget b.

The adversary flips labels only (no insertion or deletion): b bounds the
number of disagreements between observed labels and the target hypothesis,
which is exactly the mistake-counting semantics the oracles assume.
"""

from __future__ import annotations

import itertools
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from .domain import Dataset, LabeledExample, Point, flip
from .errors import CapacityError, InputError
from .hypoclasses import FiniteFamily, HypothesisFamily
from .oracles import in_robust_agreement, is_certificate
from .sampling import trial_rng

WORST_CASE_GUARD = 10**6


def _apply_flips(data: Dataset, indices: Sequence[int]) -> Dataset:
    idx = set(indices)
    examples = tuple(
        LabeledExample(ex.point, flip(ex.label)) if i in idx else ex
        for i, ex in enumerate(data)
    )
    flipped = tuple(sorted(set(data.flipped_indices) ^ idx))
    return Dataset(examples, source_indices=data.source_indices, flipped_indices=flipped)


def corrupt_random(data: Dataset, b: int, seed: int) -> Dataset:
    """Flip the labels of b distinct uniformly chosen indices."""
    if b < 0 or b > len(data):
        raise InputError(f"need 0 <= b <= |data| = {len(data)}")
    if b == 0:
        return data
    rng = trial_rng(seed, 31)
    indices = rng.choice(len(data), size=b, replace=False)
    return _apply_flips(data, [int(i) for i in indices])


def _surviving_score(family, data: Dataset, b: int, test: Point, label: int) -> int:
    """Tie-break score: how many minimal-size certifying subsets survive.

    Uses subsets of size s0 - 1 where s0 is the family's hollow star number,
    the generic size of a worst-case minimal certificate."""
    if not isinstance(family, FiniteFamily):
        return 0
    from .stars import robust_star_number

    s0, _ = robust_star_number(family, 0, multiplicity_cap=1)
    size = max(s0 - 1, 1)
    n = len(data)
    if size > n or math.comb(n, size) > 20_000:
        return 0
    count = 0
    for combo in itertools.combinations(range(n), size):
        if is_certificate(family, data, combo, b, test, label):
            count += 1
    return count


def corrupt_worst_case(
    family: HypothesisFamily,
    data: Dataset,
    b: int,
    test: Point,
    label: int,
    guard: int = WORST_CASE_GUARD,
) -> Dataset:
    """Exhaustive flip-set search for an attack ejecting (test, label) from
    the b-robust agreement region.

    Flip sets are scanned by (size, lex) order; the first success is
    returned.  When no flip set succeeds, the returned corruption minimizes
    the count of surviving minimal-size certificates (ties to the earliest
    flip set), which keeps reports stable."""
    if b < 0:
        raise InputError("budget must be >= 0")
    if b == 0:
        return data
    n = len(data)
    total = sum(math.comb(n, s) for s in range(b + 1))
    if total > guard:
        raise CapacityError(f"worst-case search needs {total} flip sets (guard {guard})")

    best: Optional[Dataset] = None
    best_score = None
    for size in range(0, b + 1):
        for combo in itertools.combinations(range(n), size):
            corrupted = _apply_flips(data, combo)
            if not in_robust_agreement(family, corrupted, b, test, label):
                return corrupted
            score = _surviving_score(family, corrupted, b, test, label)
            if best_score is None or score < best_score:
                best, best_score = corrupted, score
    return best if best is not None else data
