"""Distributions, certificate-coefficient computation, sample-complexity
experiments, and the reweighting / rejection-sampling pipeline.

The certificate coefficient of a test point is the smallest probability
mass, under the data distribution, on which a hypothesis that mislabels the
test point disagrees with the target.  It governs how many labeled samples
are needed before the test point enters the b-robust agreement region, and
reweighting the distribution toward the test point boosts it.

Randomness: every trial derives its stream from a counter-based Philox
generator keyed by (master seed, lane indices), so parallel and serial runs
agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .certify import minimal_certificate
from .domain import Certificate, Dataset, LabeledExample, Point, dpoint, vpoint
from .errors import (
    CapacityError,
    InputError,
    InsufficientSampleError,
    NotCertifiableError,
    UnboundableError,
)
from .hypoclasses import (
    FiniteFamily,
    HalfspaceFamily,
    HypothesisFamily,
    TargetHypothesis,
)
from .oracles import in_robust_agreement

REJECTION_ATTEMPT_CAP = 10**7
MC_SAFETY_FACTOR = 2.0
REWEIGHTED_BOUND_CONSTANT = 6.0


def trial_rng(seed: int, *lanes: int) -> np.random.Generator:
    """Deterministic per-trial stream: Philox keyed by (seed, *lanes)."""
    ss = np.random.SeedSequence(entropy=(int(seed),) + tuple(int(v) for v in lanes))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# distributions


class Distribution:
    def sample(self, rng: np.random.Generator, size: int) -> List[Point]:
        raise NotImplementedError


@dataclass(frozen=True)
class FiniteSupport(Distribution):
    """Discrete distribution over points with explicit probabilities."""

    points: Tuple[Point, ...]
    probabilities: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        probs = tuple(float(p) for p in self.probabilities)
        object.__setattr__(self, "probabilities", probs)
        if len(self.points) != len(probs) or not self.points:
            raise InputError("points and probabilities must align and be nonempty")
        if any(p < 0 for p in probs):
            raise InputError("probabilities must be nonnegative")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise InputError(f"probabilities sum to {sum(probs)}, not 1")

    def sample(self, rng, size):
        idx = rng.choice(len(self.points), size=size, p=np.array(self.probabilities))
        return [self.points[i] for i in np.atleast_1d(idx)]


def uniform_support(points: Sequence[Point]) -> FiniteSupport:
    n = len(points)
    return FiniteSupport(tuple(points), tuple(1.0 / n for _ in range(n)))


@dataclass(frozen=True)
class UniformBall(Distribution):
    """Uniform distribution on a Euclidean ball."""

    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise InputError("radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def sample_array(self, rng, size) -> np.ndarray:
        d = self.dim
        # isotropic direction times radius * U^(1/d)
        g = rng.standard_normal((size, d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = self.radius * rng.random(size) ** (1.0 / d)
        return np.asarray(self.center) + g / norms * radii[:, None]

    def sample(self, rng, size):
        return [vpoint(*row) for row in self.sample_array(rng, size)]


# ---------------------------------------------------------------------------
# reweighting schemes


class ReweightingScheme:
    """Pointwise weight function w: X -> [0, 1] used for rejection sampling."""

    def weight(self, point: Point) -> float:
        raise NotImplementedError

    def normalizer(self, dist: Distribution, seed: int = 0, samples: int = 200_000) -> float:
        """Acceptance mass Z = E_D[w(z)]; exact where the shapes compose,
        Monte Carlo otherwise."""
        if isinstance(dist, FiniteSupport):
            return float(
                sum(p * self.weight(pt) for pt, p in zip(dist.points, dist.probabilities))
            )
        rng = trial_rng(seed, 981)
        pts = dist.sample(rng, samples)
        return float(np.mean([self.weight(p) for p in pts]))


@dataclass(frozen=True)
class ConstantWeight(ReweightingScheme):
    value: float

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise InputError("constant weight must lie in [0, 1]")

    def weight(self, point):
        return self.value

    def normalizer(self, dist, seed=0, samples=200_000):
        return self.value


@dataclass(frozen=True)
class BallIndicator(ReweightingScheme):
    """Keep only samples inside a ball (weight 1 inside, 0 outside)."""

    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if self.radius <= 0:
            raise InputError("radius must be positive")

    def weight(self, point):
        x = point.as_array()
        return 1.0 if float(np.linalg.norm(x - np.asarray(self.center))) <= self.radius else 0.0

    def normalizer(self, dist, seed=0, samples=200_000):
        if isinstance(dist, UniformBall):
            gap = float(np.linalg.norm(np.asarray(self.center) - np.asarray(dist.center)))
            if gap + self.radius <= dist.radius + 1e-12:
                return (self.radius / dist.radius) ** dist.dim  # volume ratio
        return super().normalizer(dist, seed=seed, samples=samples)


@dataclass(frozen=True)
class TableWeight(ReweightingScheme):
    """Explicit weights for a finite support, keyed by discrete point id."""

    table: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        tbl = tuple((int(k), float(v)) for k, v in self.table)
        object.__setattr__(self, "table", tbl)
        if any(not (0.0 <= v <= 1.0) for _, v in tbl):
            raise InputError("table weights must lie in [0, 1]")

    def weight(self, point):
        if not point.is_discrete:
            raise InputError("table reweighting is defined on discrete points")
        for k, v in self.table:
            if k == point.discrete:
                return v
        return 0.0


def reweighted_distribution(dist: Distribution, scheme: ReweightingScheme) -> Distribution:
    """The tilted distribution D_w (density proportional to w(z) D(z)) for the
    composable shapes: finite support with any scheme, and a uniform ball
    restricted to an interior indicator ball."""
    if isinstance(dist, FiniteSupport):
        weights = [scheme.weight(p) for p in dist.points]
        masses = [p * w for p, w in zip(dist.probabilities, weights)]
        z = sum(masses)
        if z <= 0:
            raise InputError("reweighting annihilates the support")
        keep = [(pt, m / z) for pt, m in zip(dist.points, masses) if m > 0]
        return FiniteSupport(tuple(p for p, _ in keep), tuple(m for _, m in keep))
    if isinstance(dist, UniformBall) and isinstance(scheme, BallIndicator):
        gap = float(np.linalg.norm(np.asarray(scheme.center) - np.asarray(dist.center)))
        if gap + scheme.radius <= dist.radius + 1e-12:
            return UniformBall(scheme.center, scheme.radius)
    raise InputError("no closed form for this distribution/scheme combination")


def default_normalizer_threshold(b: int, d: int, eps: float) -> float:
    """One concrete polynomial floor for a valid reweighting's acceptance mass."""
    return eps**3 / (8.0 * (b + 1) * (d + 1))


# ---------------------------------------------------------------------------
# certificate coefficient


def certificate_coefficient(
    family: FiniteFamily,
    dist: FiniteSupport,
    target: TargetHypothesis,
    test: Point,
) -> float:
    """Exact minimum disagreement mass with the target over hypotheses that
    mislabel the test point; +inf when no hypothesis does."""
    if not isinstance(family, FiniteFamily) or not isinstance(dist, FiniteSupport):
        raise InputError("exact coefficient needs a finite family and finite support")
    target_label = target.predict(test)
    test_col = family.column(test)
    disagrees_at_test = family.matrix[:, test_col] != target_label
    if not disagrees_at_test.any():
        return math.inf
    cols = np.array([family.column(p) for p in dist.points])
    probs = np.array(dist.probabilities)
    target_row = np.array([target.predict(p) for p in dist.points], dtype=np.int8)
    mism = family.matrix[:, cols] != target_row[None, :]
    masses = mism @ probs
    return float(masses[disagrees_at_test].min())


def certificate_coefficient_mc(
    family: HalfspaceFamily,
    dist: Distribution,
    target: TargetHypothesis,
    test: Point,
    samples: int,
    seed: int,
    directions: int = 32,
) -> Tuple[float, float]:
    """One-sided upper estimate of the coefficient for halfspaces.

    The inner minimization runs over a witness family of halfspaces whose
    boundary passes through the test point: sampled directions plus, for a
    uniform ball, the analytically worst direction (center toward test).
    Returns (estimate, binomial 95% half-width).
    """
    if samples < 1000:
        raise InputError("need at least 1000 Monte Carlo samples")
    if not isinstance(family, HalfspaceFamily):
        raise InputError("Monte Carlo coefficient is for halfspace families")
    rng = trial_rng(seed, 7)
    d = family.dim
    t = test.as_array()

    if isinstance(dist, UniformBall):
        Z = dist.sample_array(rng, samples)
    else:
        Z = np.array([p.as_array() for p in dist.sample(rng, samples)])

    target_w = np.asarray(target.hypothesis, dtype=float)
    lifted = np.hstack([Z, np.ones((samples, 1))]) if family.affine else Z
    target_labels = np.where(lifted @ target_w >= 0.0, 1, -1)
    y_t = target.predict(test)

    dirs = rng.standard_normal((directions, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    if isinstance(dist, UniformBall):
        axis = t - np.asarray(dist.center)
        norm = float(np.linalg.norm(axis))
        if norm > 1e-12:
            dirs = np.vstack([axis / norm, dirs])

    # candidate through test along u: predicts -y_t exactly on {u.(z-t) >= 0}
    side = (Z - t) @ dirs.T >= 0.0
    cand_labels = np.where(side, -y_t, y_t)
    disagreement = (cand_labels != target_labels[:, None]).mean(axis=0)
    estimate = float(disagreement.min())
    halfwidth = 1.96 * math.sqrt(max(estimate * (1 - estimate), 1e-12) / samples)
    return estimate, halfwidth


def sample_size_bound(b: int, d: int, eps: float, delta: float, C: float = 8.0) -> int:
    """Sample size sufficient for the test point to enter the b-robust
    agreement region with probability 1 - delta:
    ceil(C * (b + d ln(1/eps) + ln(1/delta)) / eps)."""
    if b < 0 or d < 1:
        raise InputError("need b >= 0 and d >= 1")
    if not (0 < delta < 1):
        raise InputError("delta must lie in (0, 1)")
    if not (0 < eps <= 1):
        if eps == 0:
            raise UnboundableError(
                "certificate coefficient is zero: no finite sample certifies"
            )
        raise InputError("eps must lie in (0, 1]")
    return math.ceil(C * (b + d * math.log(1 / eps) + math.log(1 / delta)) / eps)


# ---------------------------------------------------------------------------
# agreement probability curves


@dataclass(frozen=True)
class CurvePoint:
    m: int
    trials: int
    successes: int
    probability: float
    ci_low: float
    ci_high: float
    capacity_failures: int = 0


def _wilson(successes: int, trials: int, z: float = 1.96) -> Tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    den = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, center - half), min(1.0, center + half)


def draw_labeled(
    dist: Distribution, target: TargetHypothesis, rng: np.random.Generator, m: int
) -> Dataset:
    points = dist.sample(rng, m)
    return Dataset(tuple(LabeledExample(p, target.predict(p)) for p in points))


def agreement_probability_curve(
    family: HypothesisFamily,
    dist: Distribution,
    target: TargetHypothesis,
    test: Point,
    b: int,
    m_grid: Sequence[int],
    trials: int,
    seed: int,
) -> List[CurvePoint]:
    """Empirical probability that (test, target(test)) lies in the b-robust
    agreement region of an m-sample, for each m in the grid."""
    label = target.predict(test)
    out = []
    for mi, m in enumerate(m_grid):
        successes = 0
        capacity = 0
        done = 0
        for t in range(trials):
            rng = trial_rng(seed, mi, t)
            data = draw_labeled(dist, target, rng, m)
            try:
                if in_robust_agreement(family, data, b, test, label):
                    successes += 1
                done += 1
            except CapacityError:
                capacity += 1
        prob = successes / done if done else 0.0
        lo, hi = _wilson(successes, done)
        out.append(CurvePoint(m, done, successes, prob, lo, hi, capacity))
    return out


# ---------------------------------------------------------------------------
# tightness experiments


@dataclass(frozen=True)
class BTermReport:
    b: int
    eps: float
    m: int
    trials: int
    failures: int
    failure_probability: float
    chernoff_floor: float  # 1 - exp(-(b+1)/6)


@dataclass(frozen=True)
class DeltaTermRow:
    m: int
    trials: int
    misses: int
    miss_frequency: float
    exact_probability: float  # (1 - d/k)^m


@dataclass(frozen=True)
class DeltaTermReport:
    d: int
    k: int
    delta: float
    threshold_m: float  # (1 / 2 eps) ln(1/delta)
    rows: Tuple[DeltaTermRow, ...]


@dataclass(frozen=True)
class DlogTermReport:
    d: int
    k: int
    m: int
    trials: int
    miss_events: int  # at least d coupons missing
    miss_frequency: float
    exact_probability: float  # inclusion-exclusion
    agreement_failures_checked: int


def missing_coupons_probability(k: int, m: int, at_least: int) -> float:
    """P[at least ``at_least`` of k coupons unseen in m uniform draws],
    by inclusion-exclusion."""
    if at_least <= 0:
        return 1.0
    if at_least > k:
        return 0.0
    r = at_least
    terms = []
    for j in range(r, k + 1):
        sign = -1.0 if (j - r) % 2 else 1.0
        terms.append(
            sign * math.comb(j - 1, r - 1) * math.comb(k, j) * (1 - j / k) ** m
        )
    return float(min(1.0, max(0.0, math.fsum(terms))))


def tightness_experiments(term: str, params: dict, trials: int, seed: int):
    """Desk-scale instantiations of the three lower-bound constructions that
    make each term of the sample-size bound necessary."""
    if term == "b":
        return _tightness_b(params, trials, seed)
    if term == "delta":
        return _tightness_delta(params, trials, seed)
    if term == "dlog":
        return _tightness_dlog(params, trials, seed)
    raise InputError(f"unknown tightness term {term!r} (use b|dlog|delta)")


def _singleton_setup(n: int = 3):
    from .hypoclasses import singletons

    family = singletons(n)
    target = TargetHypothesis(family, n - 1)  # labels only point n positively
    support = [dpoint(i) for i in range(1, n)]
    dist = uniform_support(support)
    test = dpoint(n)
    return family, target, dist, test


def _tightness_b(params, trials, seed) -> BTermReport:
    b = int(params.get("b", 3))
    n = int(params.get("n", 3))
    family, target, dist, test = _singleton_setup(n)
    eps = certificate_coefficient(family, dist, target, test)
    m = max(1, math.ceil((b + 1) / (4 * eps)))
    label = target.predict(test)
    failures = 0
    for t in range(trials):
        rng = trial_rng(seed, 11, t)
        data = draw_labeled(dist, target, rng, m)
        if not in_robust_agreement(family, data, b, test, label):
            failures += 1
    return BTermReport(
        b=b,
        eps=eps,
        m=m,
        trials=trials,
        failures=failures,
        failure_probability=failures / trials,
        chernoff_floor=1 - math.exp(-(b + 1) / 6),
    )


def _tightness_family_setup(d: int, k: int):
    from .hypoclasses import tightness_family

    family = tightness_family(d, k)
    target = TargetHypothesis(family, family.num_hypotheses - 1)  # the special row
    dist = uniform_support([dpoint(i) for i in range(1, k + 1)])
    test = dpoint(0)
    return family, target, dist, test


def _tightness_delta(params, trials, seed) -> DeltaTermReport:
    d = int(params.get("d", 2))
    k = int(params.get("k", 30))
    delta = float(params.get("delta", 0.1))
    family, target, dist, test = _tightness_family_setup(d, k)
    eps = d / k
    threshold = math.log(1 / delta) / (2 * eps)
    m_values = params.get("m_values")
    if m_values is None:
        m_values = [max(1, math.floor(threshold)), 2 * max(1, math.floor(threshold)), 80]
    fixed = set(range(1, d + 1))  # the designated d-subset to miss
    rows = []
    for mi, m in enumerate(m_values):
        misses = 0
        for t in range(trials):
            rng = trial_rng(seed, 13, mi, t)
            pts = dist.sample(rng, m)
            seen = {p.discrete for p in pts}
            if not (seen & fixed):
                misses += 1
        rows.append(
            DeltaTermRow(
                m=int(m),
                trials=trials,
                misses=misses,
                miss_frequency=misses / trials,
                exact_probability=(1 - d / k) ** m,
            )
        )
    return DeltaTermReport(d=d, k=k, delta=delta, threshold_m=threshold, rows=tuple(rows))


def _tightness_dlog(params, trials, seed) -> DlogTermReport:
    d = int(params.get("d", 2))
    k = int(params.get("k", 30))
    family, target, dist, test = _tightness_family_setup(d, k)
    m = int(params.get("m", math.ceil(k / 2 * math.log(k / d))))
    label = target.predict(test)
    miss_events = 0
    agreement_checked = 0
    for t in range(trials):
        rng = trial_rng(seed, 17, t)
        pts = dist.sample(rng, m)
        seen = {p.discrete for p in pts}
        missing = k - len(seen)
        if missing >= d:
            miss_events += 1
            # d unseen coupons leave a consistent subset-hypothesis that
            # mislabels the test point, so agreement must fail
            if agreement_checked < 20:
                data = Dataset(tuple(LabeledExample(p, target.predict(p)) for p in pts))
                if in_robust_agreement(family, data, 0, test, label):
                    raise NotCertifiableError(
                        "coupon-collector event did not break agreement"
                    )
                agreement_checked += 1
    return DlogTermReport(
        d=d,
        k=k,
        m=m,
        trials=trials,
        miss_events=miss_events,
        miss_frequency=miss_events / trials,
        exact_probability=missing_coupons_probability(k, m, d),
        agreement_failures_checked=agreement_checked,
    )


# ---------------------------------------------------------------------------
# rejection sampling and reweighted certificates


@dataclass(frozen=True)
class AcceptanceStats:
    accepted: int
    raw_draws: int

    @property
    def draws_per_acceptance(self) -> float:
        return self.raw_draws / self.accepted if self.accepted else math.inf


def rejection_sample(
    dist: Distribution,
    scheme: ReweightingScheme,
    rng: np.random.Generator,
    max_attempts: int = REJECTION_ATTEMPT_CAP,
) -> Tuple[Point, AcceptanceStats]:
    """Draw one point from the tilted distribution D_w: draw z from D and
    accept with probability w(z)."""
    draws = 0
    while draws < max_attempts:
        z = dist.sample(rng, 1)[0]
        draws += 1
        if rng.random() < scheme.weight(z):
            return z, AcceptanceStats(accepted=1, raw_draws=draws)
    raise InsufficientSampleError(
        f"rejection sampler starved after {max_attempts} draws"
    )


def rejection_sample_many(
    dist: Distribution,
    scheme: ReweightingScheme,
    count: int,
    rng: np.random.Generator,
    max_attempts: int = REJECTION_ATTEMPT_CAP,
) -> Tuple[List[Point], AcceptanceStats]:
    accepted: List[Point] = []
    draws = 0
    while len(accepted) < count:
        if draws >= max_attempts:
            raise InsufficientSampleError(
                f"rejection sampler starved after {draws} draws "
                f"({len(accepted)}/{count} accepted)"
            )
        batch = min(4096, max_attempts - draws)
        points = dist.sample(rng, batch)
        us = rng.random(batch)
        for z, u in zip(points, us):
            draws += 1
            if u < scheme.weight(z):
                accepted.append(z)
                if len(accepted) == count:
                    break
    return accepted, AcceptanceStats(accepted=len(accepted), raw_draws=draws)


@dataclass(frozen=True)
class ReweightedResult:
    certificate: Certificate
    eps_estimate: float
    eps_used: float
    accepted: int
    raw_draws: int
    normalizer: float


def reweighted_certificate(
    family: HypothesisFamily,
    dist: Distribution,
    scheme: ReweightingScheme,
    target: TargetHypothesis,
    b: int,
    test: Point,
    delta: float,
    seed: int,
    shrink: bool = False,
    safety_factor: float = MC_SAFETY_FACTOR,
    mc_samples: int = 100_000,
) -> ReweightedResult:
    """Certificate from rejection-sampled data.

    Draws raw samples until enough accepted samples are collected for the
    boosted coefficient of the tilted distribution (constant 6, failure
    budget split delta/2 between acceptance-count and agreement), labels them
    by the target, and verifies b-robust agreement at the test point.  Monte
    Carlo coefficient estimates are divided by ``safety_factor`` before being
    fed to the sample-size formula, since they are one-sided.
    """
    d = family.vc_dimension() if isinstance(family, FiniteFamily) else family.dim
    z_mass = scheme.normalizer(dist, seed=seed)
    tilted = reweighted_distribution(dist, scheme)

    def coefficient(distribution) -> float:
        if isinstance(family, FiniteFamily) and isinstance(distribution, FiniteSupport):
            return certificate_coefficient(family, distribution, target, test)
        est, _ = certificate_coefficient_mc(
            family, distribution, target, test, samples=mc_samples, seed=seed
        )
        return est / safety_factor

    eps_orig = coefficient(dist)
    eps_w = coefficient(tilted)
    eps_est = eps_w if isinstance(family, FiniteFamily) else eps_w * safety_factor
    if not math.isfinite(eps_w):
        eps_w = eps_est = 1.0
    if eps_w <= 0:
        raise UnboundableError("tilted distribution still has zero coefficient")

    # validity floor is a polynomial in the original coefficient
    if math.isfinite(eps_orig) and eps_orig > 0:
        floor = default_normalizer_threshold(b, d, min(eps_orig, 1.0))
        if z_mass < floor:
            raise InputError(
                f"reweighting acceptance mass {z_mass:.3e} below validity floor "
                f"{floor:.3e}"
            )
    eps_used = min(eps_w, 1.0)

    m_w = sample_size_bound(b, d, eps_used, delta / 2, C=REWEIGHTED_BOUND_CONSTANT)
    rng = trial_rng(seed, 23)
    points, stats = rejection_sample_many(dist, scheme, m_w, rng)
    data = Dataset(tuple(LabeledExample(p, target.predict(p)) for p in points))
    label = target.predict(test)
    if not in_robust_agreement(family, data, b, test, label):
        raise NotCertifiableError(
            "accepted sample did not reach the b-robust agreement region "
            "(a bounded-probability trial failure)"
        )
    if shrink:
        cert = minimal_certificate(family, data, b, test, label)
    else:
        cert = Certificate(data, tuple(range(len(data))), b, test, label)
    return ReweightedResult(
        certificate=cert,
        eps_estimate=eps_est,
        eps_used=eps_used,
        accepted=stats.accepted,
        raw_draws=stats.raw_draws,
        normalizer=z_mass,
    )
