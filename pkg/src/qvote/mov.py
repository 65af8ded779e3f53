"""Margin of victory: exhaustive search on small integer profiles.

A change of winner means the co-winner set stops being exactly ``{w}``, so a
tie with another candidate counts. Under this reading a two-candidate profile
with a gap of ``2 * mov`` votes has margin ``mov``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .profiles import Family, ProfileFamilySpec
from .voting import Rule, as_histogram, winner_sets

# Rows evaluated per batch during the search.
_CHUNK = 1 << 16


class MovSearchExhausted(RuntimeError):
    """No winner change was found with at most ``k_max`` altered votes."""

    def __init__(self, k_max: int):
        super().__init__(f"winner unchanged after moving up to {k_max} votes")
        self.k_max = k_max


@dataclass(frozen=True)
class MovResult:
    value: float
    witness: np.ndarray | None = None
    source: str = "brute-force"


@lru_cache(maxsize=16)
def _multisets(n_types: int, k: int) -> np.ndarray:
    """Count vectors of every size-``k`` multiset over ``n_types`` bins."""
    combos = np.array(list(itertools.combinations_with_replacement(range(n_types), k)),
                      dtype=np.int64)
    out = np.zeros((len(combos), n_types), dtype=np.int32)
    np.add.at(out, (np.arange(len(combos))[:, None], combos), 1)
    out.flags.writeable = False
    return out


def _moves(counts: np.ndarray, k: int):
    """Yield batches of profiles reachable by moving exactly ``k`` votes.

    Sources respect the available counts and never share a bin with the
    destinations, since a vote returned to its own bin is a smaller move.
    """
    n_types = len(counts)
    sources = _multisets(n_types, k)
    sources = sources[(sources <= counts).all(axis=1)]
    dests = _multisets(n_types, k)
    dest_support = (dests > 0).astype(np.int32)
    pending, size = [], 0
    for src in sources:
        ok = dest_support @ (src > 0).astype(np.int32) == 0
        batch = counts - src + dests[ok]
        pending.append(batch)
        size += len(batch)
        if size >= _CHUNK:
            yield np.concatenate(pending)
            pending, size = [], 0
    if pending:
        yield np.concatenate(pending)


def brute_force_mov(rule: Rule | str, hist, k_max: int) -> MovResult:
    """Smallest number of altered votes that changes the unique winner.

    Searches ``k = 1..k_max`` over every integer redistribution of ``k`` votes.
    Raises :class:`MovSearchExhausted` if none of them changes the winner.
    """
    rule = Rule.parse(rule)
    h = as_histogram(hist)
    if h.ndim != 1:
        raise ValueError("expected a single histogram")
    counts = np.rint(h).astype(np.int64)
    if not np.array_equal(counts, h):
        raise ValueError("brute-force MoV needs an integer histogram")
    base = winner_sets(rule, h)
    if base.sum() != 1:
        raise ValueError("the winner set of the input is not a singleton")
    if k_max < 1:
        raise ValueError("k_max must be positive")
    for k in range(1, k_max + 1):
        for batch in _moves(counts, k):
            changed = (winner_sets(rule, batch.astype(float)) != base).any(axis=1)
            if changed.any():
                return MovResult(float(k), batch[np.argmax(changed)].astype(float))
    raise MovSearchExhausted(k_max)


def analytic_mov(spec: ProfileFamilySpec) -> MovResult:
    """The designed margin of a synthetic family.

    This is the family's claimed value. :func:`brute_force_mov` checks it on
    small instances.
    """
    return MovResult(float(spec.mov), None, source="family design")


def perturb_within(hist, l1_bound: float, rng: np.random.Generator,
                   sparse: bool = False, integer: bool = False) -> np.ndarray:
    """Random same-total, nonnegative histogram at L1 distance below ``l1_bound``.

    ``sparse`` moves weight between one random pair of bins. ``integer`` moves
    whole votes one at a time between random bins. Otherwise a zero-sum
    Gaussian direction over all bins is used.
    """
    h = as_histogram(hist).astype(float)
    if integer:
        out = h.copy()
        votes = int(rng.integers(0, max(1, int(np.ceil(l1_bound / 2)))))
        for _ in range(votes):
            src = rng.choice(np.flatnonzero(out >= 1))
            out[src] -= 1
            out[rng.integers(len(out))] += 1
        return out
    radius = rng.uniform(0.0, 1.0) * l1_bound
    if sparse:
        out = h.copy()
        src = rng.choice(np.flatnonzero(h > 0))
        dst = rng.choice(np.delete(np.arange(len(h)), src))
        amount = min(radius / 2, h[src])
        out[src] -= amount
        out[dst] += amount
        return out
    step = rng.standard_normal(len(h))
    step -= step.mean()
    step *= radius / np.abs(step).sum()
    neg = step < 0
    scale = min(1.0, np.min(h[neg] / -step[neg])) if neg.any() else 1.0
    return np.maximum(h + scale * step, 0.0)


def _instances():
    out = []
    for n, mov in [(10, 1), (21, 3), (40, 4), (60, 6)]:
        out.append(ProfileFamilySpec(Family.TWO_CANDIDATE, n, 2, mov))
    for m, n, mov in [(3, 8, 1), (3, 12, 3), (3, 18, 6), (4, 26, 1), (4, 28, 2), (4, 30, 3)]:
        out.append(ProfileFamilySpec(Family.PLURALITY, n, m, mov))
    # The Borda family only has integer weights for m = 3 within n <= 60, mov <= 6.
    for m, n, mov in [(3, 10, 3), (3, 16, 3), (3, 14, 6), (3, 20, 6)]:
        out.append(ProfileFamilySpec(Family.BORDA, n, m, mov))
    for m, n, mov in [(3, 8, 1), (3, 12, 3), (3, 18, 6), (4, 26, 1), (4, 28, 2)]:
        out.append(ProfileFamilySpec(Family.DOMINANT_PAIR, n, m, mov))
    return tuple(out)


SMALL_INSTANCES = _instances()


@dataclass(frozen=True)
class MovCheck:
    spec: ProfileFamilySpec
    rule: Rule
    analytic: float
    brute_force: float | None

    @property
    def agrees(self) -> bool:
        return self.brute_force == self.analytic


def check_families(specs=SMALL_INSTANCES, k_max: int = 8) -> list[MovCheck]:
    """Compare the designed margin with brute force for each family/rule pair."""
    out = []
    for spec in specs:
        hist = spec.histogram()
        for rule in spec.family.target_rules:
            try:
                found = brute_force_mov(rule, hist, k_max).value
            except MovSearchExhausted:
                found = None
            out.append(MovCheck(spec, rule, analytic_mov(spec).value, found))
    return out
