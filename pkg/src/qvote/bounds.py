"""Closed-form parameters and limits for quantum and classical winner determination.

Logarithms are base 2 throughout, except for the natural log in
:func:`rounds_for`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .counting import encoding_bits


def _check_epsilon(epsilon: float, upper: float = 1.0, closed: bool = False) -> None:
    ok = 0 < epsilon <= upper if closed else 0 < epsilon < upper
    if not ok:
        bracket = "]" if closed else ")"
        raise ValueError(f"epsilon must lie in (0, {upper}{bracket}, got {epsilon}")


def sigma(epsilon: float, n: float, m: int, mov: float) -> int:
    """Output bits that make a single counting round correct w.p. ``>= 1 - epsilon``."""
    _check_epsilon(epsilon)
    if mov < 1:
        raise ValueError(f"mov must be at least 1, got {mov}")
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    t = encoding_bits(n)
    k = math.factorial(m)
    inner = t + math.log2(k / (2 * epsilon) + 2) + math.log2(math.pi * k) - math.log2(mov)
    return 2 + math.ceil(inner)


def rounds_for(epsilon: float) -> int:
    """Rounds ``K`` for which plurality over rounds is correct w.p. ``>= 1 - epsilon``."""
    _check_epsilon(epsilon)
    return math.floor(24 * math.log(1 / epsilon)) + 1


def quantum_tail_bound(s: int, delta: float) -> float:
    """Upper bound on ``P(|phi_hat - phi| >= 2**-s + delta)``."""
    if not delta > 2.0 ** -s:
        raise ValueError(f"delta must exceed 2**-s = {2.0 ** -s:g}")
    return 1 / (2 * (delta * 2 ** s - 1))


def delta_window(s: int, epsilon: float, n: float, m: int, mov: float):
    """Feasible ``[low, high)`` for the deviation ``delta``, or ``None`` when empty."""
    _check_epsilon(epsilon)
    t = encoding_bits(n)
    k = math.factorial(m)
    low = 2.0 ** -s * (k / (2 * epsilon) + 1)
    high = mov / (2 ** (t + 1) * math.pi * k) - 2.0 ** -s
    return (low, high) if low < high else None


def binary_entropy(p: float) -> float:
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def channel_capacity(n: float, mov: float) -> float:
    """Capacity of the binary channel a single sampled vote provides."""
    p = (math.floor(n / 2) + mov) / n
    if p >= 1:
        return 1.0
    return 1 - binary_entropy(p)


def classical_sample_lower_bound(n: float, mov: float, epsilon: float) -> tuple[float, float]:
    """``(exact, loose)`` minimum sample counts for error at most ``epsilon``.

    ``exact`` divides ``1 - H(epsilon)`` by the true channel capacity. ``loose``
    replaces the capacity with its upper bound ``4 mov**2 / n**2``, so it is
    never larger than ``exact``.
    """
    _check_epsilon(epsilon, upper=0.5, closed=True)
    if not 1 <= mov <= n / 2:
        raise ValueError(f"mov must lie in [1, n/2], got {mov}")
    info = 1 - binary_entropy(epsilon) if epsilon < 0.5 else 0.0
    exact = info / channel_capacity(n, mov)
    loose = info * n ** 2 / (4 * mov ** 2)
    return exact, loose


@dataclass(frozen=True)
class BoundsReport:
    n: float
    m: int
    mov: float
    epsilon: float
    sigma_s: int
    k_rounds: int
    quantum_tail: float
    classical_lb_samples: float
    classical_lb_loose: float
    delta_window: tuple[float, float] | None
    speedup_ratio: float


def bounds_report(n: float, m: int, mov: float, epsilon: float) -> BoundsReport:
    s = sigma(epsilon, n, m, mov)
    window = delta_window(s, epsilon, n, m, mov)
    tail = quantum_tail_bound(s, window[0]) if window else math.nan
    if epsilon <= 0.5 and mov <= n / 2:
        exact, loose = classical_sample_lower_bound(n, mov, epsilon)
    else:
        exact = loose = math.nan
    return BoundsReport(n=n, m=m, mov=mov, epsilon=epsilon, sigma_s=s,
                        k_rounds=rounds_for(epsilon), quantum_tail=tail,
                        classical_lb_samples=exact, classical_lb_loose=loose,
                        delta_window=window, speedup_ratio=n / mov)
