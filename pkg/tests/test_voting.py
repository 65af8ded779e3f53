import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvote import voting
from qvote.voting import Rule, rankings_of, winner_set


def brute_scores(rule, hist, m):
    """Reference tallies by looping over rankings one at a time."""
    rankings = rankings_of(m)
    if rule is Rule.PLURALITY:
        score = [0.0] * m
        for w, r in zip(hist, rankings):
            score[r[0]] += w
        return score
    if rule is Rule.BORDA:
        score = [0.0] * m
        for w, r in zip(hist, rankings):
            for i, c in enumerate(r):
                score[c] += w * (m - 1 - i)
        return score
    prefer = [[0.0] * m for _ in range(m)]
    for w, r in zip(hist, rankings):
        for i, a in enumerate(r):
            for b in r[i + 1:]:
                prefer[a][b] += w
    score = [0.0] * m
    for a, b in itertools.combinations(range(m), 2):
        if prefer[a][b] > prefer[b][a]:
            score[a] += 1
        elif prefer[a][b] < prefer[b][a]:
            score[b] += 1
        else:
            score[a] += 0.5
            score[b] += 0.5
    return score


def brute_set(rule, hist, m):
    score = brute_scores(rule, hist, m)
    best = max(score)
    return frozenset(c for c in range(m) if score[c] == best)


def index_of(ranking):
    return rankings_of(len(ranking)).index(tuple(ranking))


histograms = st.integers(2, 4).flatmap(
    lambda m: st.lists(st.integers(0, 6), min_size=math.factorial(m),
                       max_size=math.factorial(m)))


def test_rankings_small():
    assert rankings_of(2) == ((0, 1), (1, 0))
    r3 = rankings_of(3)
    assert len(r3) == 6 and r3[0] == (0, 1, 2) and r3[-1] == (2, 1, 0)
    assert len(rankings_of(4)) == 24


@pytest.mark.parametrize("m", [1, 7])
def test_rankings_out_of_range(m):
    with pytest.raises(ValueError):
        rankings_of(m)


def test_plurality_examples():
    assert voting.plurality_winner_set([3, 1]) == {0}
    assert voting.plurality_winner_set([2, 2]) == {0, 1}
    hist = np.ones(6)
    for r in rankings_of(3):
        if r[0] == 1:
            hist[index_of(r)] = 2
    assert voting.plurality_winner_set(hist) == brute_set(Rule.PLURALITY, hist, 3) == {1}


def test_borda_examples():
    hist = np.zeros(24)
    hist[index_of((0, 1, 2, 3))] = 1
    assert list(voting.borda_scores(hist[None])[0]) == [3, 2, 1, 0]
    assert voting.borda_winner_set(hist) == {0}
    assert voting.borda_winner_set(np.ones(6)) == {0, 1, 2}
    assert voting.borda_winner_set([5, 3]) == {0}


def test_copeland_examples():
    assert list(voting.copeland_scores(np.ones(24))) == [1.5] * 4
    assert voting.copeland_winner_set(np.ones(24)) == {0, 1, 2, 3}
    assert voting.copeland_winner_set([3, 1]) == {0}
    from qvote.profiles import dominant_pair_profile
    hist = dominant_pair_profile(240, 4, 6)
    assert brute_set(Rule.COPELAND, hist, 4) == voting.copeland_winner_set(hist) == {0}


def test_stv_examples(rng):
    assert voting.stv_winner_set([3, 1], rng) == (0, [1])
    hist = np.zeros(24)
    hist[index_of((2, 0, 3, 1))] = 7
    assert voting.stv_winner_set(hist, rng)[0] == 2
    hist = np.zeros(6)
    hist[index_of((0, 1, 2))] = 4
    hist[index_of((2, 1, 0))] = 3
    hist[index_of((1, 2, 0))] = 2
    assert voting.stv_winner_set(hist, rng) == (2, [1, 0])
    assert winner_set(Rule.STV, hist) == {2}


def test_stv_possible_winners_cover_tied_eliminations(rng):
    # 1 and 2 tie for last; eliminating 1 elects 2 and eliminating 2 elects 1.
    hist = np.zeros(6)
    hist[index_of((0, 1, 2))] = 3
    hist[index_of((1, 2, 0))] = 2
    hist[index_of((2, 1, 0))] = 2
    assert winner_set(Rule.STV, hist) == {1, 2}
    seen = {voting.stv_winner_set(hist, rng)[0] for _ in range(200)}
    assert seen == {1, 2}


def test_winner_tie_is_fair(rng):
    picks = np.array([voting.winner(Rule.PLURALITY, [2, 2], rng) for _ in range(4000)])
    assert abs(picks.mean() - 0.5) < 0.03


def test_winner_unique_ignores_randomness():
    for seed in range(20):
        for rule in Rule:
            assert voting.winner(rule, [5, 2], np.random.default_rng(seed)) == 0


def test_borda_full_tie_is_uniform(rng):
    picks = voting.winners(Rule.BORDA, np.ones((6000, 6)), rng)
    freq = np.bincount(picks, minlength=3) / 6000
    assert np.all(np.abs(freq - 1 / 3) < 0.025)


def test_shift_histogram():
    assert list(voting.shift_histogram([3, 1], 1)) == [4, 2]
    assert list(voting.shift_histogram([3, 1], -1)) == [2, 0]
    with pytest.raises(ValueError):
        voting.shift_histogram([3, 1], -2)


def test_rejects_bad_histograms():
    with pytest.raises(ValueError):
        voting.as_histogram([1, 2, 3])
    with pytest.raises(ValueError):
        voting.as_histogram([1, -1])


def test_plurality_of_rounds(rng):
    assert list(voting.plurality_of(np.array([[0, 1, 1], [2, 2, 0]]), 3, rng)) == [1, 2]
    picks = voting.plurality_of(np.tile([0, 1], (4000, 1)), 2, rng)
    assert abs(picks.mean() - 0.5) < 0.03


@settings(max_examples=150, deadline=None)
@given(histograms)
def test_matches_reference_tallies(weights):
    m = voting.candidate_count(len(weights))
    for rule in (Rule.PLURALITY, Rule.BORDA, Rule.COPELAND):
        assert winner_set(rule, weights) == brute_set(rule, weights, m)


@settings(max_examples=100, deadline=None)
@given(histograms, st.integers(1, 5))
def test_canceling_out(weights, c):
    for rule in Rule:
        assert winner_set(rule, weights) == winner_set(rule, voting.shift_histogram(weights, c))
    if min(weights) >= 1:
        for rule in Rule:
            assert winner_set(rule, weights) == winner_set(rule, np.array(weights) - 1.0)


@settings(max_examples=60, deadline=None)
@given(histograms, st.integers(0, 2 ** 31))
def test_stv_canceling_out_same_elimination_path(weights, seed):
    shifted = voting.shift_histogram(weights, 3)
    a = voting.stv_winner_set(weights, np.random.default_rng(seed))
    b = voting.stv_winner_set(shifted, np.random.default_rng(seed))
    assert a == b


@settings(max_examples=100, deadline=None)
@given(histograms, st.floats(0.01, 1000))
def test_scale_invariance(weights, lam):
    for rule in Rule:
        assert winner_set(rule, weights) == winner_set(rule, np.array(weights) * lam)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 100), st.floats(0, 100))
def test_majority_reduction(a, b):
    sets = {winner_set(rule, [a, b]) for rule in Rule}
    assert len(sets) == 1


@settings(max_examples=60, deadline=None)
@given(histograms, st.randoms(use_true_random=False))
def test_permutation_equivariance(weights, rnd):
    m = voting.candidate_count(len(weights))
    relabel = list(range(m))
    rnd.shuffle(relabel)
    moved = np.zeros(len(weights))
    for w, r in zip(weights, rankings_of(m)):
        moved[index_of([relabel[c] for c in r])] += w
    for rule in Rule:
        expected = frozenset(relabel[c] for c in winner_set(rule, weights))
        assert winner_set(rule, moved) == expected


def test_fractional_ties_within_tolerance():
    assert voting.plurality_winner_set([0.1 + 0.2, 0.3]) == {0, 1}
