"""Torus distance, continued fractions, and diophantine constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: a partial quotient at or above this is treated as a numerically rational tail
RATIONAL_QUOTIENT_CUTOFF = 10**12

#: double precision cannot support deeper expansions reliably
MAX_CF_DEPTH = 40


def torus_norm(x):
    """Distance from x to the nearest integer, in [0, 1/2].

    Works on scalars and arrays.  Reduction is done by a single
    round-to-nearest subtraction, never by accumulating phases.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("torus_norm: input must be finite")
    r = np.abs(arr - np.round(arr))
    return float(r) if np.isscalar(x) or arr.ndim == 0 else r


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients of a number in (0,1), with a rational-tail flag."""

    quotients: tuple[int, ...]
    terminated: bool


def continued_fraction(omega: float, depth: int) -> ContinuedFraction:
    """Partial quotients a_1..a_depth of omega in (0,1).

    Returns early with ``terminated=True`` when the remainder is rational to
    working precision (exact zero tail, or a quotient above
    ``RATIONAL_QUOTIENT_CUTOFF``).
    """
    if not 0.0 < omega < 1.0:
        raise ValueError(f"continued_fraction: omega={omega!r} not in (0,1)")
    if not 1 <= depth <= MAX_CF_DEPTH:
        raise ValueError(f"continued_fraction: depth must be in [1, {MAX_CF_DEPTH}]")
    quots: list[int] = []
    frac = omega
    for _ in range(depth):
        inv = 1.0 / frac
        if inv >= RATIONAL_QUOTIENT_CUTOFF:
            return ContinuedFraction(tuple(quots), True)
        a = math.floor(inv)
        quots.append(int(a))
        frac = inv - a
        if frac == 0.0:
            return ContinuedFraction(tuple(quots), True)
    return ContinuedFraction(tuple(quots), False)


def convergents(cf: ContinuedFraction) -> list[tuple[int, int]]:
    """(p_k, q_k) for each partial quotient, via the standard recurrence."""
    pairs = []
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    for a in cf.quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        pairs.append((p, q))
    return pairs


@dataclass(frozen=True)
class Frequency:
    """A torus rotation number with diophantine metadata.

    ``c`` is an optional verified diophantine constant: ||k*omega|| > c*k^(-A)
    for all k up to whatever range the caller checked (see ``dc_constant``).
    """

    omega: float
    A: float = 2.0
    c: float | None = None
    cf: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0.0 < self.omega < 1.0:
            raise ValueError(f"Frequency: omega={self.omega!r} not in (0,1)")
        if self.A <= 0.0:
            raise ValueError("Frequency: A must be positive")
        if self.c is not None and self.c <= 0.0:
            raise ValueError("Frequency: c must be positive when given")


def golden_frequency(A: float = 2.0) -> Frequency:
    """The inverse golden ratio (sqrt(5)-1)/2 with exponent A."""
    return Frequency((math.sqrt(5.0) - 1.0) / 2.0, A=A)


def dc_constant(freq: Frequency, K: int, A: float | None = None) -> float:
    """min over 1 <= k <= K of ||k*omega|| * k^A.

    By symmetry of the torus norm the same constant covers negative k.  A
    zero return value means omega failed the diophantine condition inside
    the scanned range (it is rational with denominator <= K).
    """
    if K < 1:
        raise ValueError("dc_constant: K must be >= 1")
    if A is None:
        A = freq.A
    best = math.inf
    step = 1_000_000
    for lo in range(1, K + 1, step):
        k = np.arange(lo, min(K, lo + step - 1) + 1, dtype=float)
        best = min(best, float(np.min(torus_norm(k * freq.omega) * k**A)))
    return best
