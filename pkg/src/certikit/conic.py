"""Self-contained Phase-I simplex engine for conic membership, halfspace
consistency, and Caratheodory support reduction.

Everything routes through one primitive: feasibility of {y >= 0 : M y = c}.
A feasible run returns a basic feasible solution (support bounded by the row
count); an infeasible run returns a Farkas certificate v with v.M <= 0 and
v.c > 0, which doubles as the separating direction for conic membership and
as the consistency witness for the halfspace LP (solved through its dual).

Arithmetic is 64-bit float with absolute tolerance ``DEFAULT_TOL`` on
residuals and pivot selection; coefficients below tolerance snap to zero.
Pivoting picks the most negative reduced cost (lowest index on ties) and
falls back to Bland's anti-cycling rule after a stall; a hard iteration cap
reports numerical failure rather than cycling forever.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, NumericalFailureError

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ConicInstance:
    """Generators z_i (signed points) and a target x, all of dimension d."""

    generators: Tuple[Tuple[float, ...], ...]
    target: Tuple[float, ...]

    def __post_init__(self):
        gens = tuple(tuple(float(v) for v in g) for g in self.generators)
        target = tuple(float(v) for v in self.target)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "target", target)
        d = len(target)
        if d < 1:
            raise InputError("dimension must be >= 1")
        if any(len(g) != d for g in gens):
            raise InputError("all generators must share the target's dimension")

    @property
    def dim(self) -> int:
        return len(self.target)

    def matrix(self) -> np.ndarray:
        """Generators as columns: shape (d, n)."""
        if not self.generators:
            return np.zeros((self.dim, 0))
        return np.array(self.generators, dtype=float).T


@dataclass(frozen=True)
class ConicSolution:
    feasible: bool
    coefficients: Optional[Tuple[float, ...]] = None
    support: Tuple[int, ...] = ()
    separator: Optional[Tuple[float, ...]] = None
    residual: float = 0.0


@dataclass
class _PhaseOneResult:
    feasible: bool
    solution: Optional[np.ndarray]
    farkas: Optional[np.ndarray]


def _phase_one(M: np.ndarray, c: np.ndarray, tol: float) -> _PhaseOneResult:
    """Feasibility of {y >= 0 : M y = c} by Phase-I simplex with artificials.

    Feasible: returns a basic solution y (at most m nonzeros).
    Infeasible: returns v with v.M <= 0 and v.c > 0 (verified by caller).
    """
    M = np.asarray(M, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = M.shape
    flipped = c < 0
    M = np.where(flipped[:, None], -M, M)
    c = np.where(flipped, -c, c)

    # tableau columns: [real vars | artificials | rhs]; bottom row holds
    # reduced costs for the artificial-sum objective
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = M
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = c
    T[m, :n] = -M.sum(axis=0)
    T[m, -1] = -c.sum()
    basis = list(range(n, n + m))

    scale = max(1.0, float(np.abs(c).sum()))
    stall_limit = 2 * (m + n) + 16
    max_iter = 1000 + 20 * (m + n)
    bland = False
    stall = 0
    best_obj = -T[m, -1]

    for _ in range(max_iter):
        costs = T[m, :n]  # artificials are barred from re-entering
        eligible = np.flatnonzero(costs < -tol)
        if eligible.size == 0:
            break
        if bland:
            j = int(eligible[0])
        else:
            j = int(eligible[np.argmin(costs[eligible])])
        col = T[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            raise NumericalFailureError("phase-one column with no positive pivot")
        ratios = T[rows, -1] / col[rows]
        rmin = ratios.min()
        tied = rows[ratios <= rmin + tol * (1.0 + abs(rmin))]
        r = int(min(tied, key=lambda i: basis[i]))

        piv = T[r, j]
        T[r, :] /= piv
        factors = T[:, j].copy()
        factors[r] = 0.0
        T -= np.outer(factors, T[r, :])
        T[:, j] = 0.0
        T[r, j] = 1.0
        basis[r] = j

        obj = -T[m, -1]
        if obj < best_obj - tol * scale:
            best_obj = obj
            stall = 0
        else:
            stall += 1
            if stall > stall_limit:
                bland = True
    else:
        raise NumericalFailureError("simplex cycling guard exceeded")

    objective = -T[m, -1]
    if objective <= 10 * tol * scale:
        y = np.zeros(n)
        for i, bi in enumerate(basis):
            if bi < n:
                y[bi] = T[i, -1]
        y[np.abs(y) < tol] = 0.0
        y = np.maximum(y, 0.0)
        return _PhaseOneResult(True, y, None)

    # simplex multipliers: reduced cost of artificial i is 1 - v_i
    v = 1.0 - T[m, n : n + m]
    v = np.where(flipped, -v, v)
    return _PhaseOneResult(False, None, v)


def conic_membership(instance: ConicInstance, tol: float = DEFAULT_TOL) -> ConicSolution:
    """Decide x in cone(z_1, ..., z_n).

    Feasible: coefficients form a basic solution, so the support has at most
    d indices. Infeasible: the separator w satisfies w.z_i >= 0 for all i and
    w.x < 0 (re-verified at 10*tol before returning).
    """
    Z = instance.matrix()
    x = np.asarray(instance.target, dtype=float)
    d, n = Z.shape

    if np.all(np.abs(x) <= tol):
        # the zero vector lies in every cone
        return ConicSolution(True, coefficients=(0.0,) * n, support=(), residual=0.0)
    if n == 0:
        w = -x
        return ConicSolution(False, separator=tuple(w), residual=0.0)

    res = _phase_one(Z, x, tol)
    if res.feasible:
        alpha = res.solution
        residual = float(np.max(np.abs(Z @ alpha - x)))
        support = tuple(int(i) for i in np.flatnonzero(alpha > tol))
        if len(support) > d:
            raise NumericalFailureError("basic solution support exceeds dimension")
        if residual > 10 * tol * max(1.0, float(np.max(np.abs(x)))):
            raise NumericalFailureError(f"membership residual {residual:.3e} too large")
        return ConicSolution(True, tuple(alpha), support, None, residual)

    w = -res.farkas
    viol = float(np.min(Z.T @ w)) if n else 0.0
    wx = float(w @ x)
    check = 10 * tol * max(1.0, float(np.max(np.abs(Z))) if n else 1.0)
    if viol < -check or wx >= -tol:
        raise NumericalFailureError("separator failed verification")
    return ConicSolution(False, separator=tuple(w), residual=0.0)


def caratheodory_reduce(
    instance: ConicInstance,
    coefficients: Sequence[float],
    tol: float = DEFAULT_TOL,
) -> ConicSolution:
    """Shrink a feasible conic combination to support size at most d.

    While the support exceeds d, its generators are linearly dependent; a
    dependency direction (from the SVD nullspace) is stepped along until a
    coefficient hits zero. Support never grows and the residual drifts by at
    most d*tol.
    """
    Z = instance.matrix()
    x = np.asarray(instance.target, dtype=float)
    d, n = Z.shape
    alpha = np.array(coefficients, dtype=float)
    if alpha.shape != (n,):
        raise InputError(f"expected {n} coefficients, got {alpha.shape}")
    if alpha.size and alpha.min() < -tol:
        raise InputError("coefficients must be nonnegative")
    alpha = np.maximum(alpha, 0.0)
    xscale = max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    if float(np.max(np.abs(Z @ alpha - x))) > 100 * tol * xscale:
        raise InputError("coefficients do not certify membership within tolerance")

    while True:
        support = np.flatnonzero(alpha > tol)
        if support.size <= d:
            break
        Zs = Z[:, support]
        # more support columns than rows: a nullspace direction always exists
        _, _, vt = np.linalg.svd(Zs)
        beta = vt[-1, :]
        if float(np.max(np.abs(Zs @ beta))) > 1e-6 * max(1.0, float(np.max(np.abs(Zs)))):
            raise NumericalFailureError("dependency search failed on oversized support")
        if np.max(beta) <= tol:
            beta = -beta
        pos = beta > tol
        t = np.min(alpha[support][pos] / beta[pos])
        alpha[support] = alpha[support] - t * beta
        alpha[np.abs(alpha) < tol] = 0.0
        if alpha.min() < -10 * tol:
            raise NumericalFailureError("reduction step produced negative coefficients")
        alpha = np.maximum(alpha, 0.0)

    residual = float(np.max(np.abs(Z @ alpha - x))) if n else float(np.max(np.abs(x)))
    if residual > max(d, 1) * 100 * tol * xscale:
        raise NumericalFailureError(f"reduction residual {residual:.3e} too large")
    support = tuple(int(i) for i in np.flatnonzero(alpha > tol))
    return ConicSolution(True, tuple(alpha), support, None, residual)


def halfspace_consistency_lp(
    positives: Sequence[Sequence[float]],
    negatives: Sequence[Sequence[float]],
    extra: Optional[Tuple[Sequence[float], str]] = None,
    tol: float = DEFAULT_TOL,
) -> Tuple[bool, Optional[np.ndarray]]:
    """Feasibility of {w : w.p >= 0 for positives, w.q <= -1 for negatives}.

    ``extra`` appends one more constraint: (vector, ">=0") or (vector, "<=-1").
    Strict negative margins are encoded as <= -1; positive rescaling makes
    this lossless alongside the homogeneous >= 0 constraints.

    Solved through the Farkas dual (a conic-membership-shaped system with
    d+1 rows), so large point counts stay cheap; the witness w is recovered
    from the dual multipliers and re-verified at 10*tol.
    """
    pos = [np.asarray(p, dtype=float) for p in positives]
    neg = [np.asarray(q, dtype=float) for q in negatives]
    if extra is not None:
        vec, relation = extra
        if relation == ">=0":
            pos.append(np.asarray(vec, dtype=float))
        elif relation == "<=-1":
            neg.append(np.asarray(vec, dtype=float))
        else:
            raise InputError(f"unknown extra relation {relation!r}")
    dims = {p.shape[0] for p in pos} | {q.shape[0] for q in neg}
    if len(dims) > 1:
        raise InputError(f"mixed constraint dimensions: {sorted(dims)}")
    if not neg:
        d = dims.pop() if dims else 1
        return True, np.zeros(d)  # w = 0 predicts +1 everywhere
    d = dims.pop()

    # infeasibility of the primal is equivalent to: some convex combination
    # of the negatives lies in the cone of the positives
    n_pos, n_neg = len(pos), len(neg)
    M = np.zeros((d + 1, n_pos + n_neg))
    for j, p in enumerate(pos):
        M[:d, j] = -p
    for j, q in enumerate(neg):
        M[:d, n_pos + j] = q
        M[d, n_pos + j] = 1.0
    c = np.zeros(d + 1)
    c[d] = 1.0

    res = _phase_one(M, c, tol)
    if res.feasible:
        return False, None

    v = res.farkas
    v0 = float(v[d])
    if v0 <= tol:
        raise NumericalFailureError("dual certificate has nonpositive scale")
    w = v[:d] / v0
    scale = max(1.0, max(float(np.max(np.abs(p))) for p in pos + neg))
    ok_pos = all(float(w @ p) >= -10 * tol * scale for p in pos)
    ok_neg = all(float(w @ q) <= -1 + 10 * tol * scale for q in neg)
    if not (ok_pos and ok_neg):
        raise NumericalFailureError("consistency witness failed verification")
    return True, w
