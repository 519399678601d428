import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from certikit import (
    InputError,
    LabeledExample,
    chunked_certificate,
    corrupt_random,
    corrupt_worst_case,
    dpoint,
    in_robust_agreement,
    is_certificate,
    singletons,
    trial_rng,
)
from conftest import discrete_dataset


class TestCorruptRandom:
    def test_identity_at_zero(self):
        data = discrete_dataset([(1, -1), (2, 1)])
        assert corrupt_random(data, 0, seed=1) == data

    def test_full_flip(self):
        data = discrete_dataset([(1, -1), (2, 1), (3, -1)])
        flipped = corrupt_random(data, 3, seed=2)
        assert [ex.label for ex in flipped] == [1, -1, 1]
        assert flipped.flipped_indices == (0, 1, 2)

    @settings(max_examples=30)
    @given(st.integers(0, 10**6), st.integers(0, 6))
    def test_flip_count_is_exact(self, seed, b):
        data = discrete_dataset([(i, -1) for i in range(1, 7)])
        corrupted = corrupt_random(data, b, seed=seed)
        changed = sum(
            1 for a, c in zip(data, corrupted) if a.label != c.label
        )
        assert changed == b == len(corrupted.flipped_indices)

    def test_budget_validation(self):
        data = discrete_dataset([(1, -1)])
        with pytest.raises(InputError):
            corrupt_random(data, 2, seed=0)


class TestCorruptWorstCase:
    def test_identity_at_zero(self):
        fam = singletons(3)
        data = discrete_dataset([(3, 1)])
        assert corrupt_worst_case(fam, data, 0, dpoint(3), 1) == data

    @pytest.mark.parametrize("b", [1, 2])
    def test_enough_copies_cannot_be_ejected(self, b):
        fam = singletons(3)
        data = discrete_dataset([(3, 1)] * (2 * b + 1))
        corrupted = corrupt_worst_case(fam, data, b, dpoint(3), 1)
        assert in_robust_agreement(fam, corrupted, b, dpoint(3), 1)

    @pytest.mark.parametrize("b", [1, 2])
    def test_too_few_copies_fall(self, b):
        fam = singletons(3)
        data = discrete_dataset([(3, 1)] * (2 * b))
        corrupted = corrupt_worst_case(fam, data, b, dpoint(3), 1)
        assert not in_robust_agreement(fam, corrupted, b, dpoint(3), 1)
        assert len(corrupted.flipped_indices) <= b

    def test_copies_with_noise_still_safe(self):
        fam = singletons(4)
        b = 1
        data = discrete_dataset([(3, 1)] * (2 * b + 1) + [(1, -1), (2, -1)])
        corrupted = corrupt_worst_case(fam, data, b, dpoint(3), 1)
        assert in_robust_agreement(fam, corrupted, b, dpoint(3), 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_chunked_certificates_survive_budgeted_corruption(seed):
    """End-to-end robustness: corrupt a clean stream with at most b flips,
    then extract a chunked certificate; whenever extraction succeeds the
    result must validate at budget b."""
    fam = singletons(3)
    b = 1
    rng = trial_rng(seed, 77)
    examples = [
        LabeledExample(dpoint(int(rng.integers(1, 3))), -1) for _ in range(320)
    ]
    data = discrete_dataset([(ex.point.discrete, ex.label) for ex in examples])
    corrupted = corrupt_random(data, b, seed=seed)
    try:
        cert = chunked_certificate(
            fam, iter(corrupted.examples), b, dpoint(3), 1, chunk_size=8
        )
    except Exception:
        return  # extraction may legitimately run out of qualifying chunks
    assert is_certificate(fam, cert.source, cert.indices, b, dpoint(3), 1)
