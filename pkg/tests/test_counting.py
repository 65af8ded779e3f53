import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvote.counting import (CountingDistribution, CountingParams, counting_round,
                            counting_rounds, encoding_bits, estimate_count, pe_distribution,
                            phase_of, sample_outcome, sample_phase_outcomes)
from qvote.profiles import two_candidate_profile


def amplitude_oracle(phi, s):
    """Outcome law from the phase-estimation amplitudes, summed explicitly."""
    size = 1 << s
    k = np.arange(size)
    b = np.arange(size)[:, None]
    amps = np.exp(2j * np.pi * k * (phi - b / size)).sum(axis=1) / size
    return np.abs(amps) ** 2


def circular(x):
    return np.abs((x + 0.5) % 1.0 - 0.5)


def test_encoding_bits():
    assert encoding_bits(2 ** 20) == 20
    assert encoding_bits(2 ** 20 + 1) == 21
    assert encoding_bits(240) == 8
    assert encoding_bits(1) == 0
    assert encoding_bits(1000.5) == 10
    assert CountingParams.for_voters(2 ** 20, 14).qubits == 34
    with pytest.raises(ValueError):
        CountingParams(t=4, s=1)


def test_phase_examples():
    assert phase_of(0, 10) == 0
    assert phase_of(1024, 10) == pytest.approx(0.5)
    assert phase_of(512, 10) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        phase_of(1025, 10)


@pytest.mark.parametrize("phi,s", [(0.3, 3), (0.123456, 6), (0.49, 8), (0.01, 5)])
def test_matches_amplitude_oracle(phi, s):
    assert np.allclose(pe_distribution(phi, s).probs, amplitude_oracle(phi, s), atol=1e-12)


def test_pe_examples():
    for s in (2, 5, 9):
        assert pe_distribution(0.0, s).probs[0] == 1
    assert pe_distribution(5 / 16, 4).probs[5] == 1
    probs = pe_distribution(0.3, 3).probs
    assert probs.sum() == pytest.approx(1, abs=1e-12)
    assert probs[2] + probs[3] > 0.8
    assert set(np.argsort(probs)[-2:]) == {2, 3}


def test_estimate_examples():
    assert estimate_count(0, 5, 10) == 0
    assert estimate_count(16, 5, 10) == pytest.approx(1024)
    assert estimate_count(4, 4, 2) == pytest.approx(2)


def test_sample_outcome():
    rng = np.random.default_rng(1)
    point = CountingDistribution(3, np.eye(8)[5])
    assert all(sample_outcome(point, rng) == 5 for _ in range(50))
    uniform = CountingDistribution(2, np.full(4, 0.25))
    freq = np.bincount(sample_outcome(uniform, rng, size=100_000), minlength=4) / 100_000
    assert np.all(np.abs(freq - 0.25) < 0.01)
    a = sample_outcome(pe_distribution(0.3, 6), np.random.default_rng(7), size=20)
    b = sample_outcome(pe_distribution(0.3, 6), np.random.default_rng(7), size=20)
    assert np.array_equal(a, b)


def test_sampling_frequencies_follow_distribution():
    rng = np.random.default_rng(3)
    probs = pe_distribution(0.2, 5).probs
    draws = sample_phase_outcomes(0.2, 5, 200_000, rng)
    freq = np.bincount(draws, minlength=32) / 200_000
    assert np.abs(freq - probs).max() < 0.005


def test_counting_round_examples():
    rng = np.random.default_rng(5)
    params = CountingParams(t=10, s=6)
    hist = np.zeros(6)
    hist[2] = 1024
    for _ in range(20):
        assert np.allclose(counting_round(hist, params, rng), hist, atol=1e-9)
    hist = np.array([0, 300, 0, 200.5, 0, 7])
    est = counting_rounds(hist, params, 100, rng)
    assert np.all(est[:, [0, 2, 4]] == 0)
    with pytest.raises(ValueError):
        counting_round([1000, 100], params, rng)


def test_per_entry_error_at_s14():
    hist = two_candidate_profile(2 ** 20, 1024)
    params = CountingParams.for_voters(2 ** 20, 14)
    est = counting_rounds(hist, params, 10_000, np.random.default_rng(11))
    ok = np.abs(est - hist) < 1024 / 2
    assert ok.mean(axis=0).min() >= 0.99


def test_per_entry_error_exact():
    # Exact probability that one entry lands within MoV/m! of its count.
    hist = two_candidate_profile(2 ** 20, 1024)
    for h in hist:
        phi = phase_of(h, 20)
        probs = pe_distribution(phi, 14).probs
        err = np.abs(estimate_count(np.arange(1 << 14), 14, 20) - h)
        assert probs[err < 512].sum() == pytest.approx(0.99336, abs=5e-5)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.integers(2, 16))
def test_normalization(phi, s):
    assert pe_distribution(phi, s).probs.sum() == pytest.approx(1, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.integers(2, 12))
def test_mirror_symmetry(phi, s):
    size = 1 << s
    b = np.arange(size)
    a = pe_distribution(phi, s).probs
    mirrored = pe_distribution(1 - phi, s).probs
    assert np.allclose(mirrored, a[(size - b) % size], atol=1e-12)
    assert np.allclose(estimate_count(b, s, 10), estimate_count((size - b) % size, s, 10),
                       atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.integers(2, 12), st.floats(1.01, 100))
def test_tail_bound(phi, s, ratio):
    delta = ratio * 2.0 ** -s
    probs = pe_distribution(phi, s).probs
    dist = circular(np.arange(1 << s) / (1 << s) - phi)
    mass = probs[dist >= 2.0 ** -s + delta].sum()
    assert mass <= 1 / (2 * (delta * 2 ** s - 1)) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.integers(2, 14))
def test_two_nearest_outcomes_concentrate(phi, s):
    size = 1 << s
    probs = pe_distribution(phi, s).probs
    lo = math.floor(phi * size) % size
    assert probs[lo] + probs[(lo + 1) % size] >= 8 / math.pi ** 2 - 1e-12


@pytest.mark.parametrize("eps", [1e-9, 3.125e-12, 1e-11])
@pytest.mark.parametrize("s", [2, 8, 16])
def test_phases_just_off_the_grid(eps, s):
    for phi in (eps, 1 - eps, 0.25 + eps, 0.25 - eps):
        probs = pe_distribution(phi, s).probs
        assert probs.max() <= 1 + 1e-12
        assert probs.sum() == pytest.approx(1, abs=1e-9)
        assert probs[round(phi * (1 << s)) % (1 << s)] > 0.999
