"""Synthetic profile families with a designed winner (candidate 0) and margin.

All generators return real-valued histograms and never round. Ranking indices
follow :func:`qvote.voting.rankings_of`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .voting import Rule, rankings_of

_ATOL = 1e-9


class Family(str, enum.Enum):
    TWO_CANDIDATE = "two-candidate"
    PLURALITY = "plurality"
    BORDA = "borda"
    DOMINANT_PAIR = "dominant-pair"

    @property
    def target_rules(self) -> tuple[Rule, ...]:
        return {
            Family.TWO_CANDIDATE: tuple(Rule),
            Family.PLURALITY: (Rule.PLURALITY,),
            Family.BORDA: (Rule.BORDA,),
            Family.DOMINANT_PAIR: (Rule.COPELAND, Rule.STV),
        }[self]


@dataclass(frozen=True)
class ProfileFamilySpec:
    family: Family
    n: float
    m: int
    mov: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.n > 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.mov < 0:
            raise ValueError(f"mov must be nonnegative, got {self.mov}")
        if self.family is Family.TWO_CANDIDATE and self.m != 2:
            raise ValueError("the two-candidate family needs m == 2")

    def histogram(self) -> np.ndarray:
        if self.family is Family.TWO_CANDIDATE:
            return two_candidate_profile(self.n, self.mov)
        if self.family is Family.PLURALITY:
            return plurality_profile(self.n, self.m, self.mov)
        if self.family is Family.BORDA:
            return borda_profile(self.n, self.m, self.mov)
        return dominant_pair_profile(self.n, self.m, self.mov)


def family_for(rule: Rule | str, m: int) -> Family:
    """The family the experiments use for ``rule`` with ``m`` candidates."""
    rule = Rule.parse(rule)
    if m == 2:
        return Family.TWO_CANDIDATE
    return {
        Rule.PLURALITY: Family.PLURALITY,
        Rule.BORDA: Family.BORDA,
        Rule.COPELAND: Family.DOMINANT_PAIR,
        Rule.STV: Family.DOMINANT_PAIR,
    }[rule]


def _checked(hist: np.ndarray, what: str) -> np.ndarray:
    if np.any(hist < -_ATOL):
        raise ValueError(f"{what}: parameters give negative vote weights")
    return np.maximum(hist, 0.0)


def two_candidate_profile(n, mov) -> np.ndarray:
    """``floor(n/2) + mov`` votes for ``0 > 1`` and ``ceil(n/2) - mov`` for ``1 > 0``."""
    winner = math.floor(n / 2) + mov
    loser = math.ceil(n / 2) - mov
    return _checked(np.array([winner, loser], dtype=float), "two-candidate profile")


def plurality_profile(n, m: int, mov) -> np.ndarray:
    """Boost the single ranking ``0 > 1 > ... > m-1``; spread the rest evenly."""
    k = math.factorial(m)
    hist = np.full(k, (n - 2 * mov) / k)
    hist[0] = (n + 2 * (k - 1) * mov) / k
    return _checked(hist, "plurality profile")


def borda_profile(n, m: int, mov) -> np.ndarray:
    if m < 3:
        raise ValueError("the Borda family needs m >= 3")
    k = math.factorial(m)
    d = 4 * mov / (math.factorial(m - 2) * m)
    first = np.array([r[0] == 0 for r in rankings_of(m)])
    hist = np.where(first, (n + (m - 1) * d) / k, (n - d) / k)
    return _checked(hist, "Borda profile")


def dominant_pair_profile(n, m: int, mov) -> np.ndarray:
    """Boost every ranking that starts ``0 > 1``; used for Copeland and STV."""
    if m < 3:
        raise ValueError("the dominant-pair family needs m >= 3")
    k = math.factorial(m)
    base = (n - 2 * mov) / k
    lead = np.array([r[:2] == (0, 1) for r in rankings_of(m)])
    hist = np.where(lead, base + 2 * mov / math.factorial(m - 2), base)
    return _checked(hist, "dominant-pair profile")
