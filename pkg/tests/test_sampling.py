import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats
from hypothesis import given, settings, strategies as st

from certikit import (
    BallIndicator,
    ConstantWeight,
    FiniteSupport,
    HalfspaceFamily,
    InputError,
    TableWeight,
    TargetHypothesis,
    UnboundableError,
    UniformBall,
    agreement_probability_curve,
    certificate_coefficient,
    certificate_coefficient_mc,
    dpoint,
    missing_coupons_probability,
    reweighted_certificate,
    reweighted_distribution,
    rejection_sample,
    rejection_sample_many,
    sample_size_bound,
    singletons,
    tightness_experiments,
    tightness_family,
    trial_rng,
    uniform_support,
    vpoint,
)


def ball_cap_fraction(d: int, t: float) -> float:
    """Fraction of the unit d-ball beyond the hyperplane x1 = t (numeric)."""
    num, _ = scipy.integrate.quad(lambda s: (1 - s * s) ** ((d - 1) / 2), t, 1)
    den, _ = scipy.integrate.quad(lambda s: (1 - s * s) ** ((d - 1) / 2), -1, 1)
    return num / den


class TestTrialRng:
    def test_reproducible_streams(self):
        a = trial_rng(42, 3, 7).random(5)
        b = trial_rng(42, 3, 7).random(5)
        assert np.array_equal(a, b)

    def test_lane_separation(self):
        a = trial_rng(42, 3, 7).random(5)
        b = trial_rng(42, 3, 8).random(5)
        assert not np.array_equal(a, b)


class TestCertificateCoefficient:
    def test_singletons_half(self):
        fam = singletons(3)
        target = TargetHypothesis(fam, 2)
        dist = uniform_support([dpoint(1), dpoint(2)])
        assert certificate_coefficient(fam, dist, target, dpoint(3)) == 0.5

    def test_tightness_family_d_over_k(self):
        d, k = 2, 8
        fam = tightness_family(d, k)
        target = TargetHypothesis(fam, fam.num_hypotheses - 1)
        dist = uniform_support([dpoint(i) for i in range(1, k + 1)])
        assert certificate_coefficient(fam, dist, target, dpoint(0)) == d / k

    def test_unanimous_point_gives_sentinel(self):
        from certikit import FiniteFamily

        fam = FiniteFamily([1, 2], [[1, 1], [1, -1]])  # everyone labels 1 positive
        target = TargetHypothesis(fam, 0)
        dist = uniform_support([dpoint(1), dpoint(2)])
        assert certificate_coefficient(fam, dist, target, dpoint(1)) == math.inf

    def test_zero_coefficient_when_support_blind(self):
        fam = singletons(3)
        target = TargetHypothesis(fam, 2)
        dist = uniform_support([dpoint(1)])  # point 2 never sampled
        assert certificate_coefficient(fam, dist, target, dpoint(3)) == 0.0


class TestCoefficientMC:
    def make_family(self, d):
        fam = HalfspaceFamily(d, affine=True)
        target = TargetHypothesis(fam, (0.0,) * d + (1.0,))  # all-positive
        return fam, target

    def test_unit_ball_cap_upper_estimate(self):
        d = 6
        fam, target = self.make_family(d)
        dist = UniformBall((0.0,) * d, 1.0)
        test = vpoint(0.5, *([0.0] * (d - 1)))
        est, half = certificate_coefficient_mc(fam, dist, target, test, 100_000, seed=5)
        cap = ball_cap_fraction(d, 0.5)
        assert est <= cap + 3 * half
        assert est > 0

    def test_recentered_ball_gives_half(self):
        d = 6
        fam, target = self.make_family(d)
        test = vpoint(0.5, *([0.0] * (d - 1)))
        dist = UniformBall(test.vector, 0.5)
        est, half = certificate_coefficient_mc(fam, dist, target, test, 100_000, seed=6)
        assert abs(est - 0.5) <= 0.03

    def test_center_of_ball_is_half(self):
        d = 3
        fam, target = self.make_family(d)
        dist = UniformBall((0.0,) * d, 1.0)
        est, half = certificate_coefficient_mc(
            fam, dist, target, vpoint(0.0, 0.0, 0.0), 50_000, seed=7
        )
        assert abs(est - 0.5) <= 0.02

    def test_sample_floor(self):
        fam, target = self.make_family(2)
        dist = UniformBall((0.0, 0.0), 1.0)
        with pytest.raises(InputError):
            certificate_coefficient_mc(fam, dist, target, vpoint(0.0, 0.0), 10, seed=1)


class TestSampleSizeBound:
    def test_plug_in_values(self):
        assert sample_size_bound(0, 1, 1.0, 1 / math.e) == 8
        assert sample_size_bound(2, 1,  0.5, 1 / math.e) == 60

    def test_monotonicity(self):
        base = sample_size_bound(1, 2, 0.5, 0.1)
        assert sample_size_bound(2, 2, 0.5, 0.1) >= base
        assert sample_size_bound(1, 3, 0.5, 0.1) >= base
        assert sample_size_bound(1, 2, 0.25, 0.1) >= base
        assert sample_size_bound(1, 2, 0.5, 0.05) >= base

    def test_zero_eps_unboundable(self):
        with pytest.raises(UnboundableError):
            sample_size_bound(0, 1, 0.0, 0.1)
        with pytest.raises(InputError):
            sample_size_bound(0, 1, 1.5, 0.1)


class TestCurve:
    def setup_method(self):
        self.fam = singletons(3)
        self.target = TargetHypothesis(self.fam, 2)
        self.dist = uniform_support([dpoint(1), dpoint(2)])
        self.test = dpoint(3)

    def test_zero_samples_never_agree(self):
        (pt,) = agreement_probability_curve(
            self.fam, self.dist, self.target, self.test, 0, [0], trials=20, seed=1
        )
        assert pt.probability == 0.0

    def test_large_m_reaches_one(self):
        (pt,) = agreement_probability_curve(
            self.fam, self.dist, self.target, self.test, 0, [40], trials=50, seed=2
        )
        assert pt.probability == 1.0

    def test_monotone_in_m_up_to_noise(self):
        pts = agreement_probability_curve(
            self.fam, self.dist, self.target, self.test, 0, [1, 2, 4, 8, 16],
            trials=300, seed=3,
        )
        probs = [p.probability for p in pts]
        for a, b in zip(probs, probs[1:]):
            sigma = math.sqrt(0.25 / 300)
            assert b >= a - 3 * sigma

    def test_zero_mass_support_never_agrees(self):
        # distribution that cannot distinguish the competing hypotheses:
        # agreement probability stays 0 no matter how large m gets
        blind = uniform_support([dpoint(1)])
        pts = agreement_probability_curve(
            self.fam, blind, self.target, self.test, 0, [1, 8, 64], trials=40, seed=4
        )
        assert all(p.probability == 0.0 for p in pts)

    def test_threshold_probability(self):
        eps = 0.5
        m = sample_size_bound(0, 1, eps, 0.1)
        (pt,) = agreement_probability_curve(
            self.fam, self.dist, self.target, self.test, 0, [m], trials=400, seed=5
        )
        assert pt.probability >= 0.9 - 3 * math.sqrt(0.9 * 0.1 / 400)


class TestMissingCoupons:
    def exact_j_missing(self, k, m, j):
        """Reference: P[exactly j coupons unseen], classical occupancy form."""
        total = 0.0
        for i in range(0, k - j + 1):
            total += (-1) ** i * math.comb(k - j, i) * ((k - j - i) / k) ** m
        return math.comb(k, j) * total

    @pytest.mark.parametrize("k,m", [(5, 3), (6, 10), (30, 41)])
    def test_matches_occupancy_distribution(self, k, m):
        for at_least in range(0, k + 1):
            tail = sum(self.exact_j_missing(k, m, j) for j in range(at_least, k + 1))
            assert missing_coupons_probability(k, m, at_least) == pytest.approx(
                tail, abs=1e-9
            )

    def test_edges(self):
        assert missing_coupons_probability(10, 5, 0) == 1.0
        assert missing_coupons_probability(10, 5, 11) == 0.0
        # m = 0: all coupons missing
        assert missing_coupons_probability(4, 0, 4) == pytest.approx(1.0)

    def test_monte_carlo_agreement(self):
        k, m, d = 12, 18, 2
        rng = trial_rng(99, 0)
        hits = 0
        trials = 4000
        for _ in range(trials):
            seen = set(rng.integers(0, k, size=m).tolist())
            if k - len(seen) >= d:
                hits += 1
        exact = missing_coupons_probability(k, m, d)
        sigma = math.sqrt(exact * (1 - exact) / trials)
        assert abs(hits / trials - exact) <= 4 * sigma


class TestTightness:
    def test_b_term_fails_often(self):
        report = tightness_experiments("b", {"b": 3}, trials=400, seed=21)
        assert report.m == 2
        assert report.failure_probability > 0.01
        assert report.chernoff_floor > 0.01

    def test_delta_term_matches_closed_form(self):
        report = tightness_experiments(
            "delta", {"d": 2, "k": 30, "m_values": [17, 40]}, trials=2000, seed=22
        )
        for row in report.rows:
            sigma = math.sqrt(row.exact_probability * (1 - row.exact_probability) / row.trials)
            assert abs(row.miss_frequency - row.exact_probability) <= 4 * sigma
        assert report.rows[0].m < report.threshold_m
        assert report.rows[0].miss_frequency > report.delta

    def test_dlog_term_exact_oracle(self):
        report = tightness_experiments("dlog", {"d": 2, "k": 30}, trials=1500, seed=23)
        assert report.m == math.ceil(15 * math.log(15))
        assert report.miss_events > 0
        sigma = math.sqrt(report.exact_probability * (1 - report.exact_probability) / report.trials)
        assert abs(report.miss_frequency - report.exact_probability) <= 4 * sigma
        assert report.agreement_failures_checked > 0

    def test_unknown_term(self):
        with pytest.raises(InputError):
            tightness_experiments("vc", {}, 10, 0)


class TestRejectionSampling:
    def test_constant_one_accepts_immediately(self):
        dist = uniform_support([dpoint(1), dpoint(2)])
        point, stats = rejection_sample(dist, ConstantWeight(1.0), trial_rng(1, 0))
        assert stats.raw_draws == 1
        assert stats.draws_per_acceptance == 1.0

    def test_ball_indicator_acceptance_rate(self):
        d = 2
        dist = UniformBall((0.0, 0.0), 1.0)
        test = (0.5, 0.0)
        scheme = BallIndicator(test, 0.5)
        _, stats = rejection_sample_many(dist, scheme, 2000, trial_rng(2, 0))
        rate = stats.accepted / stats.raw_draws
        assert abs(rate - 0.25) < 0.03  # volume ratio (1/2)^2

    def test_finite_table_matches_tilted_distribution(self):
        dist = FiniteSupport(
            (dpoint(1), dpoint(2), dpoint(3)), (0.5, 0.3, 0.2)
        )
        scheme = TableWeight(((1, 0.2), (2, 0.9), (3, 0.5)))
        tilted = reweighted_distribution(dist, scheme)
        points, stats = rejection_sample_many(dist, scheme, 100_000, trial_rng(3, 0))
        counts = {1: 0, 2: 0, 3: 0}
        for p in points:
            counts[p.discrete] += 1
        expected = {
            p.discrete: prob * 100_000
            for p, prob in zip(tilted.points, tilted.probabilities)
        }
        chi2, pvalue = scipy.stats.chisquare(
            [counts[i] for i in (1, 2, 3)], [expected[i] for i in (1, 2, 3)]
        )
        assert pvalue > 0.001

    def test_starvation(self):
        from certikit.errors import InsufficientSampleError

        dist = uniform_support([dpoint(1)])
        with pytest.raises(InsufficientSampleError):
            rejection_sample(dist, ConstantWeight(0.0), trial_rng(4, 0), max_attempts=500)

    def test_normalizer_values(self):
        dist = UniformBall((0.0, 0.0, 0.0), 1.0)
        scheme = BallIndicator((0.5, 0.0, 0.0), 0.5)
        assert scheme.normalizer(dist) == pytest.approx(1 / 8)
        assert ConstantWeight(0.25).normalizer(dist) == 0.25


class TestReweightedCertificate:
    def test_constant_scheme_matches_direct_sampling(self):
        fam = singletons(3)
        target = TargetHypothesis(fam, 2)
        dist = uniform_support([dpoint(1), dpoint(2)])
        result = reweighted_certificate(
            fam, dist, ConstantWeight(1.0), target, 0, dpoint(3), delta=0.1, seed=31
        )
        assert result.raw_draws == result.accepted
        assert result.certificate.size == result.accepted
        assert result.eps_estimate == 0.5

    def test_table_boost_shrinks_bound(self):
        fam = singletons(4)
        target = TargetHypothesis(fam, 3)
        dist = FiniteSupport(
            (dpoint(1), dpoint(2), dpoint(3)), (0.8, 0.1, 0.1)
        )
        flat = reweighted_certificate(
            fam, dist, ConstantWeight(1.0), target, 0, dpoint(4), delta=0.1, seed=32
        )
        boosted = reweighted_certificate(
            fam,
            dist,
            TableWeight(((1, 0.125), (2, 1.0), (3, 1.0))),
            target,
            0,
            dpoint(4),
            delta=0.1,
            seed=32,
        )
        assert boosted.eps_estimate > flat.eps_estimate
        assert boosted.accepted < flat.accepted  # boosted coefficient, fewer samples

    def test_ball_pipeline_small_dimension(self):
        d = 3
        fam = HalfspaceFamily(d, affine=True)
        target = TargetHypothesis(fam, (0.0,) * d + (1.0,))
        dist = UniformBall((0.0,) * d, 1.0)
        test = vpoint(0.5, 0.0, 0.0)
        result = reweighted_certificate(
            fam,
            dist,
            BallIndicator(test.vector, 0.5),
            target,
            1,
            test,
            delta=0.1,
            seed=33,
            mc_samples=20_000,
        )
        ratio = result.raw_draws / result.accepted
        assert 2**d / 2 <= ratio <= 2**d * 2
        assert abs(result.eps_estimate - 0.5) <= 0.05
