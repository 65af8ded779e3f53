"""Anonymous voting rules over real-valued ranking histograms.

A histogram is a length-``m!`` vector of nonnegative vote weights, one entry
per ranking of the candidates ``0..m-1``. Rankings are enumerated in
lexicographic order, so index 0 is ``0 > 1 > ... > m-1`` and the last index
is the fully reversed ranking.

Every rule is evaluated on a batch of histograms at once (a 2-D array with one
histogram per row). The scalar helpers are thin wrappers around the batch
versions.
"""

from __future__ import annotations

import enum
import itertools
import math
from functools import lru_cache

import numpy as np

MIN_CANDIDATES = 2
MAX_CANDIDATES = 6

# Ties are detected relative to the histogram's total weight.
TIE_RTOL = 1e-9


class Rule(str, enum.Enum):
    PLURALITY = "plurality"
    BORDA = "borda"
    COPELAND = "copeland"
    STV = "stv"

    @classmethod
    def parse(cls, value: "Rule | str") -> "Rule":
        if isinstance(value, Rule):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown rule {value!r}; expected one of "
                             f"{[r.value for r in cls]}") from None


def _check_m(m: int) -> None:
    if not MIN_CANDIDATES <= m <= MAX_CANDIDATES:
        raise ValueError(f"m must be in [{MIN_CANDIDATES}, {MAX_CANDIDATES}], got {m}")


@lru_cache(maxsize=None)
def rankings_of(m: int) -> tuple[tuple[int, ...], ...]:
    """All ``m!`` rankings of candidates ``0..m-1`` in lexicographic order."""
    _check_m(m)
    return tuple(itertools.permutations(range(m)))


@lru_cache(maxsize=None)
def _tables(m: int):
    rankings = np.array(rankings_of(m), dtype=np.int64)
    n_types = len(rankings)
    pos = np.empty_like(rankings)
    rows = np.arange(n_types)[:, None]
    pos[rows, rankings] = np.arange(m)[None, :]
    top = np.zeros((n_types, m))
    top[np.arange(n_types), rankings[:, 0]] = 1.0
    borda = (m - 1 - pos).astype(float)
    # prefers[r, a*m + b] = 1 if ranking r puts a above b
    prefers = (pos[:, :, None] < pos[:, None, :]).reshape(n_types, m * m).astype(float)
    # top_of[mask][r, c] = 1 if c is the highest-ranked remaining candidate in r
    top_of = {}
    for mask in range(1, 1 << m):
        table = np.zeros((n_types, m))
        for r, ranking in enumerate(rankings):
            for c in ranking:
                if mask >> int(c) & 1:
                    table[r, c] = 1.0
                    break
        top_of[mask] = table
    for arr in (rankings, pos, top, borda, prefers):
        arr.flags.writeable = False
    return rankings, pos, top, borda, prefers, top_of


def candidate_count(n_types: int) -> int:
    """Recover ``m`` from a histogram length ``m!``."""
    for m in range(MIN_CANDIDATES, MAX_CANDIDATES + 1):
        if math.factorial(m) == n_types:
            return m
    raise ValueError(f"histogram length {n_types} is not m! for m in "
                     f"[{MIN_CANDIDATES}, {MAX_CANDIDATES}]")


def as_histogram(weights) -> np.ndarray:
    """Validate ``weights`` and return them as a float histogram (1-D or batch)."""
    hist = np.asarray(weights, dtype=float)
    if hist.ndim not in (1, 2):
        raise ValueError("histogram must be 1-D, or 2-D for a batch")
    candidate_count(hist.shape[-1])
    if not np.all(np.isfinite(hist)):
        raise ValueError("histogram weights must be finite")
    if np.any(hist < 0):
        raise ValueError("histogram weights must be nonnegative")
    return hist


def _batch(hist) -> tuple[np.ndarray, bool]:
    h = as_histogram(hist)
    return np.atleast_2d(h), h.ndim == 1


def _tolerance(h: np.ndarray) -> np.ndarray:
    return TIE_RTOL * np.maximum(h.sum(axis=1), 1.0)


def _argmax_mask(scores: np.ndarray, tol: np.ndarray) -> np.ndarray:
    best = scores.max(axis=1, keepdims=True)
    return scores >= best - tol[:, None]


def plurality_scores(h: np.ndarray) -> np.ndarray:
    m = candidate_count(h.shape[-1])
    return h @ _tables(m)[2]


def borda_scores(h: np.ndarray) -> np.ndarray:
    m = candidate_count(h.shape[-1])
    return h @ _tables(m)[3]


def pairwise_weights(h: np.ndarray) -> np.ndarray:
    """``w[..., a, b]``: total weight of rankings that put ``a`` above ``b``."""
    m = candidate_count(h.shape[-1])
    return (h @ _tables(m)[4]).reshape(h.shape[:-1] + (m, m))


def copeland_scores(h: np.ndarray, tol: np.ndarray | None = None) -> np.ndarray:
    h2 = np.atleast_2d(h)
    if tol is None:
        tol = _tolerance(h2)
    w = pairwise_weights(h2)
    margin = w - np.swapaxes(w, 1, 2)
    t = tol[:, None, None]
    points = np.where(margin > t, 1.0, np.where(margin >= -t, 0.5, 0.0))
    m = w.shape[1]
    points[:, np.arange(m), np.arange(m)] = 0.0
    scores = points.sum(axis=2)
    return scores if np.ndim(h) == 2 else scores[0]


def _stv_possible_winners(h: np.ndarray, tol: np.ndarray) -> np.ndarray:
    """Every candidate that wins under some resolution of elimination ties."""
    batch, n_types = h.shape
    m = candidate_count(n_types)
    top_of = _tables(m)[5]
    full = (1 << m) - 1
    rows = np.arange(batch)
    masks = np.full(batch, full, dtype=np.int64)
    for _ in range(m - 1):
        new_rows, new_masks = [], []
        for mask in np.unique(masks):
            sel = masks == mask
            r = rows[sel]
            tallies = h[r] @ top_of[int(mask)]
            remaining = np.array([(int(mask) >> c) & 1 for c in range(m)], dtype=bool)
            low = np.where(remaining, tallies, np.inf).min(axis=1, keepdims=True)
            tied = remaining & (tallies <= low + tol[r][:, None])
            for c in range(m):
                hit = tied[:, c]
                if hit.any():
                    new_rows.append(r[hit])
                    new_masks.append(np.full(hit.sum(), int(mask) & ~(1 << c), dtype=np.int64))
        pairs = np.unique(np.stack([np.concatenate(new_rows), np.concatenate(new_masks)]), axis=1)
        rows, masks = pairs[0], pairs[1]
    out = np.zeros((batch, m), dtype=bool)
    winner = np.log2(masks).round().astype(np.int64)
    out[rows, winner] = True
    return out


def winner_sets(rule: Rule | str, hist) -> np.ndarray:
    """Boolean co-winner mask, shape ``(m,)`` or ``(batch, m)``.

    For STV the set holds every candidate that survives some sequence of
    elimination tie-breaks.
    """
    rule = Rule.parse(rule)
    h, single = _batch(hist)
    tol = _tolerance(h)
    if rule is Rule.PLURALITY:
        mask = _argmax_mask(plurality_scores(h), tol)
    elif rule is Rule.BORDA:
        mask = _argmax_mask(borda_scores(h), tol)
    elif rule is Rule.COPELAND:
        # Copeland points are multiples of 0.5.
        mask = _argmax_mask(copeland_scores(h, tol), np.full(len(h), 0.25))
    else:
        mask = _stv_possible_winners(h, tol)
    return mask[0] if single else mask


def _as_set(mask: np.ndarray) -> frozenset[int]:
    return frozenset(int(c) for c in np.flatnonzero(mask))


def plurality_winner_set(hist) -> frozenset[int]:
    return _as_set(winner_sets(Rule.PLURALITY, as_histogram(hist).reshape(-1)))


def borda_winner_set(hist) -> frozenset[int]:
    return _as_set(winner_sets(Rule.BORDA, as_histogram(hist).reshape(-1)))


def copeland_winner_set(hist) -> frozenset[int]:
    return _as_set(winner_sets(Rule.COPELAND, as_histogram(hist).reshape(-1)))


def winner_set(rule: Rule | str, hist) -> frozenset[int]:
    return _as_set(winner_sets(rule, as_histogram(hist).reshape(-1)))


def _uniform_pick(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    keys = rng.random(mask.shape)
    return np.where(mask, keys, -1.0).argmax(axis=1)


def stv_runs(hist, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Run STV on each row, breaking elimination ties uniformly at random.

    Eliminated candidates' weight moves to the highest-ranked remaining
    candidate of each ranking. Returns ``(winners, elimination_orders)`` with
    shapes ``(batch,)`` and ``(batch, m - 1)``.
    """
    h, _ = _batch(hist)
    batch, n_types = h.shape
    m = candidate_count(n_types)
    top_of = _tables(m)[5]
    tol = _tolerance(h)
    weights = 1 << np.arange(m)
    remaining = np.ones((batch, m), dtype=bool)
    order = np.empty((batch, m - 1), dtype=np.int64)
    for step in range(m - 1):
        masks = remaining @ weights
        tallies = np.empty((batch, m))
        for mask in np.unique(masks):
            sel = masks == mask
            tallies[sel] = h[sel] @ top_of[int(mask)]
        low = np.where(remaining, tallies, np.inf).min(axis=1, keepdims=True)
        tied = remaining & (tallies <= low + tol[:, None])
        out = _uniform_pick(tied, rng)
        order[:, step] = out
        remaining[np.arange(batch), out] = False
    return remaining.argmax(axis=1), order


def stv_winner_set(hist, elim_randomness: np.random.Generator) -> tuple[int, list[int]]:
    """Single STV run: ``(winner, elimination_order)``."""
    winners, order = stv_runs(as_histogram(hist).reshape(1, -1), elim_randomness)
    return int(winners[0]), [int(c) for c in order[0]]


def winners(rule: Rule | str, hist, rng: np.random.Generator) -> np.ndarray:
    """Tie-broken winner of each row.

    Plurality, Borda and Copeland pick uniformly from the co-winner set. STV
    resolves ties where they occur, during elimination.
    """
    rule = Rule.parse(rule)
    h, _ = _batch(hist)
    if rule is Rule.STV:
        return stv_runs(h, rng)[0]
    return _uniform_pick(winner_sets(rule, h), rng)


def winner(rule: Rule | str, hist, tie_randomness: np.random.Generator) -> int:
    return int(winners(rule, as_histogram(hist).reshape(1, -1), tie_randomness)[0])


def shift_histogram(hist, c: float) -> np.ndarray:
    """Add ``c`` to every ranking type; the result must stay nonnegative."""
    h = as_histogram(hist)
    shifted = h + c
    if np.any(shifted < 0):
        raise ValueError(f"shifting by {c} makes some entries negative")
    return shifted


def plurality_of(choices: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Plurality over candidate labels, row-wise, with uniform tie-breaking.

    ``choices`` has shape ``(batch, K)``.
    """
    choices = np.atleast_2d(choices)
    counts = np.zeros((choices.shape[0], m), dtype=np.int64)
    np.add.at(counts, (np.arange(choices.shape[0])[:, None], choices), 1)
    return _uniform_pick(counts == counts.max(axis=1, keepdims=True), rng)
