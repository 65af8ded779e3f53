"""Quantum-accelerated voting and the classical sampling baseline.

Both algorithms have a single-run form that returns a :class:`VoteOutcome`.
Each also has a batched ``*_trials`` form that returns only the announced
winners of many independent runs, which is what the experiment harness uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counting import CountingParams, counting_rounds, encoding_bits
from .voting import Rule, as_histogram, candidate_count, plurality_of, winners


@dataclass(frozen=True)
class CostReport:
    paper_runtime_units: int
    oracle_queries: int


@dataclass(frozen=True)
class VoteOutcome:
    announced_winner: int
    round_winners: tuple[int, ...] | None
    cost: CostReport


def quantum_cost(m: int, K: int, s: int) -> CostReport:
    return CostReport(paper_runtime_units=K * (1 << s),
                      oracle_queries=K * math.factorial(m) * ((1 << s) - 1))


def classical_cost(T: int) -> CostReport:
    return CostReport(paper_runtime_units=T, oracle_queries=T)


def _quantum_rounds(hist, rule, K: int, s: int, trials: int, rng: np.random.Generator):
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    if s < 2:
        raise ValueError(f"s must be at least 2, got {s}")
    h = as_histogram(hist)
    if h.ndim != 1:
        raise ValueError("expected a single histogram")
    params = CountingParams(t=encoding_bits(h.sum()), s=s)
    estimates = counting_rounds(h, params, trials * K, rng)
    round_winners = winners(rule, estimates, rng).reshape(trials, K)
    if K == 1:
        return round_winners[:, 0], round_winners
    return plurality_of(round_winners, candidate_count(len(h)), rng), round_winners


def quantum_trials(hist, rule: Rule | str, K: int, s: int, trials: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Announced winners of ``trials`` independent quantum runs."""
    return _quantum_rounds(hist, rule, K, s, trials, rng)[0]


def quantum_vote(hist, rule: Rule | str, K: int, s: int,
                 randomness: np.random.Generator) -> VoteOutcome:
    """Run ``K`` rounds of counting, then take plurality over the round winners.

    Each round estimates every histogram entry independently with ``s``-bit
    counting and applies ``rule`` to the estimate. Ties among the round
    winners are broken uniformly.
    """
    announced, rounds = _quantum_rounds(hist, rule, K, s, 1, randomness)
    m = candidate_count(len(as_histogram(hist)))
    return VoteOutcome(int(announced[0]), tuple(int(c) for c in rounds[0]),
                       quantum_cost(m, K, s))


def sample_histograms(hist, T: int, replacement: bool, trials: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Histograms of ``T`` sampled votes, one row per trial.

    With replacement the rows are multinomial in ``hist / n``; without
    replacement they are multivariate hypergeometric.
    """
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    h = as_histogram(hist)
    if h.ndim != 1:
        raise ValueError("expected a single histogram")
    total = h.sum()
    if not total > 0:
        raise ValueError("cannot sample from an empty profile")
    if replacement:
        return rng.multinomial(T, h / total, size=trials)
    counts = np.rint(h).astype(np.int64)
    if not np.array_equal(counts, h):
        raise ValueError("sampling without replacement needs an integer histogram")
    if T > counts.sum():
        raise ValueError(f"cannot draw T={T} votes without replacement from {counts.sum()}")
    return rng.multivariate_hypergeometric(counts, T, size=trials)


def classical_trials(hist, rule: Rule | str, T: int, replacement: bool, trials: int,
                     rng: np.random.Generator) -> np.ndarray:
    sampled = sample_histograms(hist, T, replacement, trials, rng)
    return winners(rule, sampled.astype(float), rng)


def classical_vote(hist, rule: Rule | str, T: int, replacement: bool,
                   randomness: np.random.Generator) -> VoteOutcome:
    announced = classical_trials(hist, rule, T, replacement, 1, randomness)
    return VoteOutcome(int(announced[0]), None, classical_cost(T))
