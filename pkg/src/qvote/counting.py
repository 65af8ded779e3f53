"""Exact classical simulation of quantum counting.

Counting the ``count`` marked items among ``2**t`` encodes the phase
``phi = arcsin(sqrt(count / 2**t)) / pi``. Phase estimation with ``s`` output
bits then returns ``b`` in ``[0, 2**s)`` with the Fejer-kernel probability

    P(b) = sin^2(2**s * pi * d) / (4**s * sin^2(pi * d)),   d = phi - b / 2**s

and the count is read back as ``2**t * sin^2(pi * b / 2**s)``.

Only the eigenphase ``phi`` is simulated. The physical state is an equal
mixture of ``phi`` and ``1 - phi``, but the kernel is mirror symmetric and the
estimator is even under ``b -> 2**s - b``, so both give the same law for the
estimated count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .voting import as_histogram

# Below this distance from a grid point the kernel is replaced by its limit.
EXACT_PHASE_ATOL = 1e-12


def encoding_bits(n: float) -> int:
    """``t = ceil(log2 n)``, the number of bits needed to index ``n`` voters."""
    if not n > 0:
        raise ValueError(f"n must be positive, got {n}")
    nearest = round(n)
    if abs(n - nearest) <= 1e-9 * max(1.0, n):
        return (int(nearest) - 1).bit_length()
    return math.ceil(math.log2(n))


@dataclass(frozen=True)
class CountingParams:
    t: int
    s: int

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")
        if self.s < 2:
            raise ValueError(f"s must be at least 2, got {self.s}")

    @classmethod
    def for_voters(cls, n: float, s: int) -> "CountingParams":
        return cls(t=encoding_bits(n), s=s)

    @property
    def qubits(self) -> int:
        return self.t + self.s


@dataclass(frozen=True)
class CountingDistribution:
    s: int
    probs: np.ndarray

    def __post_init__(self):
        if self.probs.shape != (1 << self.s,):
            raise ValueError("probs must have 2**s entries")


def phase_of(count, t: int):
    """Encoded phase in ``[0, 1/2]`` for ``count`` marked items out of ``2**t``."""
    c = np.asarray(count, dtype=float)
    size = float(1 << t)
    if np.any(c < 0) or np.any(c > size * (1 + 1e-12)):
        raise ValueError(f"count must lie in [0, 2**t] = [0, {size:g}]")
    phi = np.arcsin(np.sqrt(np.clip(c / size, 0.0, 1.0))) / np.pi
    return float(phi) if phi.ndim == 0 else phi


def pe_distribution(phi: float, s: int) -> CountingDistribution:
    if s < 2:
        raise ValueError(f"s must be at least 2, got {s}")
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must lie in [0, 1], got {phi}")
    size = 1 << s
    x = math.ldexp(phi, s)
    nearest = round(x)
    probs = np.zeros(size)
    if abs(x - nearest) < math.ldexp(EXACT_PHASE_ATOL, s):
        probs[nearest % size] = 1.0
        return CountingDistribution(s, probs)
    # The numerator sin^2(pi * 2**s * d) is the same for every outcome.
    # Distances are wrapped to the nearest period first; the subtractions are
    # exact, so phases just below a grid point keep full relative precision.
    numerator = math.sin(math.pi * (x - nearest)) ** 2
    offsets = x - np.arange(size)
    offsets -= size * np.round(offsets / size)
    denominator = np.sin(np.pi * np.ldexp(offsets, -s)) ** 2
    probs[:] = numerator / (float(size) ** 2 * denominator)
    return CountingDistribution(s, probs)


@lru_cache(maxsize=8)
def _outcome_cdf(phi: float, s: int) -> np.ndarray:
    cdf = np.cumsum(pe_distribution(phi, s).probs)
    cdf /= cdf[-1]
    cdf.flags.writeable = False
    return cdf


def _draw(cdf: np.ndarray, size, rng: np.random.Generator) -> np.ndarray:
    b = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(b, len(cdf) - 1)


def sample_outcome(dist: CountingDistribution, randomness: np.random.Generator, size=None):
    cdf = np.cumsum(dist.probs)
    cdf /= cdf[-1]
    b = _draw(cdf, size, randomness)
    return int(b) if size is None else b


def sample_phase_outcomes(phi: float, s: int, size, rng: np.random.Generator) -> np.ndarray:
    """Draw outcomes for phase ``phi`` using the cached cumulative table."""
    return _draw(_outcome_cdf(float(phi), s), size, rng)


def estimate_count(b, s: int, t: int):
    est = math.ldexp(1.0, t) * np.sin(np.pi * np.ldexp(np.asarray(b, dtype=float), -s)) ** 2
    return float(est) if est.ndim == 0 else est


def counting_rounds(hist, params: CountingParams, rounds: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Estimated histograms for ``rounds`` independent counting rounds.

    Returns shape ``(rounds, m!)``. Entries with equal weight share one cached
    outcome table.
    """
    h = as_histogram(hist)
    if h.ndim != 1:
        raise ValueError("counting expects a single histogram")
    if h.sum() > math.ldexp(1.0, params.t) * (1 + 1e-12):
        raise ValueError(f"total weight {h.sum():g} exceeds 2**t = {1 << params.t}")
    phases = phase_of(h, params.t)
    outcomes = np.empty((rounds, len(h)), dtype=np.int64)
    for phi in np.unique(phases):
        cols = np.flatnonzero(phases == phi)
        outcomes[:, cols] = sample_phase_outcomes(phi, params.s, (rounds, len(cols)), rng)
    return estimate_count(outcomes, params.s, params.t)


def counting_round(hist, params: CountingParams, randomness: np.random.Generator) -> np.ndarray:
    """One estimated histogram."""
    return counting_rounds(hist, params, 1, randomness)[0]
