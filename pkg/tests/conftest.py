"""Shared test fixtures and independent reference oracles.

The reference implementations here deliberately take the slow, literal
route (full quantifier enumeration, scipy LPs per sign pattern) so that the
library's encodings are checked against something that shares none of their
code paths.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from certikit import (
    Dataset,
    FiniteFamily,
    LabeledExample,
    dpoint,
)


def naive_weighted_error(family, h, weighted):
    return sum(w.weight for w in weighted if family.predict(h, w.point) != w.label)


def naive_realizable(family: FiniteFamily, weighted, b):
    return any(
        naive_weighted_error(family, h, weighted) <= b for h in family.hypotheses()
    )


def naive_in_agreement(family: FiniteFamily, data: Dataset, b, test, label):
    """Direct quantifier evaluation: every within-budget hypothesis must
    predict the claimed label."""
    for h in family.hypotheses():
        mistakes = sum(1 for ex in data if family.predict(h, ex.point) != ex.label)
        if mistakes <= b and family.predict(h, test) != label:
            return False
    return True


def scipy_halfspace_feasible(positives, negatives) -> bool:
    """Reference consistency check via scipy: w.p >= 0, w.q <= -1."""
    positives = [np.asarray(p, float) for p in positives]
    negatives = [np.asarray(q, float) for q in negatives]
    if not negatives:
        return True
    d = (positives + negatives)[0].shape[0]
    rows, rhs = [], []
    for p in positives:
        rows.append(-p)
        rhs.append(0.0)
    for q in negatives:
        rows.append(q)
        rhs.append(-1.0)
    res = linprog(
        c=np.zeros(d),
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(None, None)] * d,
        method="highs",
    )
    return res.status == 0


def halfspace_patterns(points: np.ndarray):
    """All sign patterns realizable by (lifted) halfspaces on the given
    points, each certified by an independent scipy LP."""
    n = points.shape[0]
    out = []
    for pattern in itertools.product((1, -1), repeat=n):
        pos = [points[i] for i in range(n) if pattern[i] == 1]
        neg = [points[i] for i in range(n) if pattern[i] == -1]
        if scipy_halfspace_feasible(pos, neg):
            out.append(pattern)
    return out


def pattern_realizable(points, labels, weights, b):
    """Brute-force b-robust realizability for halfspaces: scan realizable
    sign patterns and count weighted disagreements with the labels."""
    for pattern in halfspace_patterns(points):
        err = sum(w for p, y, w in zip(pattern, labels, weights) if p != y)
        if err <= b:
            return True
    return False


def random_finite_family(rng: np.random.Generator, max_domain=4, max_h=8):
    n = int(rng.integers(2, max_domain + 1))
    rows = set()
    target_count = int(rng.integers(1, max_h + 1))
    attempts = 0
    while len(rows) < target_count and attempts < 200:
        rows.add(tuple(int(v) for v in rng.choice([-1, 1], size=n)))
        attempts += 1
    matrix = np.array(sorted(rows), dtype=np.int8)
    return FiniteFamily(range(1, n + 1), matrix)


def discrete_dataset(pairs):
    return Dataset(tuple(LabeledExample(dpoint(p), y) for p, y in pairs))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
