"""Green's functions through the bounded cosine factorization, decay fits, and small-window oracles.

G is always obtained by solving B G = diag(cos), never by inverting H - E
directly: the cosine factor absorbs the tangent poles, so the solve stays
well posed arbitrarily close to a singular phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import ModelParams, OperatorWindow, assemble_window

#: magnitudes below this are numeric zeros for decay fitting
DECAY_FLOOR = 1e-300

#: exponent convention for bounds quoted with a just-below-one-half power
HALF_MINUS_EXPONENT = 0.45

#: largest window side the factorial-cost cofactor oracle accepts
ORACLE_MAX_SIDE = 12


class ResonanceError(RuntimeError):
    """The regularized window matrix is exactly rank deficient."""


class DegenerateFitError(RuntimeError):
    """Too few usable entries above the numeric floor to fit a decay rate."""


@dataclass(frozen=True)
class GreensMatrix:
    interval: tuple[int, int]
    values: np.ndarray
    via: str  # "factorized" | "cramer"
    residual: float  # sup norm of (H-E)G - I; nan on singular windows

    @property
    def side(self) -> int:
        return self.interval[1] - self.interval[0] + 1


def greens_function(window: OperatorWindow) -> GreensMatrix:
    """Solve B G = diag(cos) column by column; residual checked on nonsingular windows."""
    b = window.b_matrix
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(b, check_finite=False)
    d = np.diagonal(lu)
    if np.any(d == 0.0):
        from .determinant import log_abs_det
        raise ResonanceError(f"window {window.interval} at x={window.x!r} is resonant: "
                             f"{log_abs_det(b)}")
    rhs = np.diag(window.cos_diag).astype(b.dtype)
    g = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    if window.singular_flag:
        residual = math.nan
    else:
        residual = float(np.max(np.abs(window.h_minus_e @ g - np.eye(window.side))))
    return GreensMatrix(interval=window.interval, values=g, via="factorized", residual=residual)


def det_cofactor(matrix):
    """Determinant by first-row cofactor expansion, memoized over column subsets.

    The expansion is exact combinatorics (no pivoting), which makes it an
    independent reference for the LU-based paths; cost grows like 2^side.
    """
    m = np.asarray(matrix)
    n = m.shape[0]
    if n > ORACLE_MAX_SIDE:
        raise ValueError(f"det_cofactor: side {n} exceeds the oracle limit {ORACLE_MAX_SIDE}")
    if n == 0:
        return 1.0
    memo = {}

    def expand(row, mask):
        if row == n:
            return 1.0
        got = memo.get(mask)
        if got is not None:
            return got
        total = 0.0
        sign = 1.0
        rest = mask
        while rest:
            low = rest & -rest
            j = low.bit_length() - 1
            a = m[row, j]
            if a != 0.0:
                total += sign * a * expand(row + 1, mask & ~low)
            sign = -sign
            rest ^= low
        memo[mask] = total
        return total

    return expand(0, (1 << n) - 1)


def cramer_oracle(window: OperatorWindow, n: int, n_prime: int) -> float:
    """|G(n, n')| via cofactor determinants of B: |cos(theta_{n'})| |minor| / |det B|.

    All cosine products cancel between numerator and denominator, so the
    value is well defined even at singular phases.  Indices are relative to
    the window start; sides above ``ORACLE_MAX_SIDE`` are refused.
    """
    side = window.side
    if side > ORACLE_MAX_SIDE:
        raise ValueError(f"cramer_oracle: side {side} exceeds {ORACLE_MAX_SIDE}")
    if not (0 <= n < side and 0 <= n_prime < side):
        raise IndexError("cramer_oracle: indices must lie inside the window")
    b = window.b_matrix
    denom = det_cofactor(b)
    if denom == 0.0:
        raise ResonanceError(f"window {window.interval} at x={window.x!r} is resonant")
    minor = np.delete(np.delete(b, n_prime, axis=0), n, axis=1)
    return float(abs(window.cos_diag[n_prime]) * abs(det_cofactor(minor)) / abs(denom))


@dataclass(frozen=True)
class DecayEstimate:
    rate: float
    offset: float
    r2: float
    predicted_rate: float
    predicted_offset: float
    floor_fraction: float


def predicted_decay(params: ModelParams, n_sites: int) -> DecayEstimate:
    """Seed estimate: asymptotic rate rho/2 with the eps^(1/40) N edge offset."""
    return DecayEstimate(
        rate=math.nan, offset=math.nan, r2=math.nan,
        predicted_rate=params.symbol.rho / 2.0,
        predicted_offset=(params.eps ** (1.0 / 40.0)) * n_sites if params.eps > 0.0 else 0.0,
        floor_fraction=math.nan,
    )


def band_means(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Per-distance mean of log|G| over entries above the floor.

    Returns (distances, means, usable_count, floored_count); distances with
    no usable entry get mean -inf.
    """
    side = values.shape[0]
    dist = np.arange(side)
    means = np.full(side, -np.inf)
    usable = 0
    floored = 0
    for d in dist:
        if d == 0:
            entries = np.abs(np.diagonal(values))
        else:
            entries = np.concatenate([np.abs(np.diagonal(values, d)),
                                      np.abs(np.diagonal(values, -d))])
        good = entries > DECAY_FLOOR
        usable += int(np.count_nonzero(good))
        floored += int(len(entries) - np.count_nonzero(good))
        if good.any():
            means[d] = float(np.mean(np.log(entries[good])))
    return dist, means, usable, floored


def decay_fit(g: GreensMatrix, predicted: DecayEstimate | None = None) -> DecayEstimate:
    """Least-squares decay rate of band-averaged log|G| over distances in [N/4, N-1].

    Entries below ``DECAY_FLOOR`` are excluded and counted into
    ``floor_fraction``.  Fewer than 10 usable entries in the fit range is a
    degenerate fit.
    """
    side = g.side
    d_min = max(1, math.ceil(side / 4))
    values = g.values
    usable = 0
    floored = 0
    xs, ys = [], []
    for d in range(d_min, side):
        entries = np.concatenate([np.abs(np.diagonal(values, d)),
                                  np.abs(np.diagonal(values, -d))])
        good = entries > DECAY_FLOOR
        usable += int(np.count_nonzero(good))
        floored += int(len(entries) - np.count_nonzero(good))
        if good.any():
            xs.append(float(d))
            ys.append(float(np.mean(np.log(entries[good]))))
    if usable < 10 or len(xs) < 2:
        raise DegenerateFitError(
            f"decay_fit: {usable} usable entries above the floor at distances >= {d_min}"
        )
    x = np.asarray(xs)
    y = np.asarray(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    seed = predicted
    return DecayEstimate(
        rate=float(-slope), offset=float(intercept), r2=r2,
        predicted_rate=seed.predicted_rate if seed else math.nan,
        predicted_offset=seed.predicted_offset if seed else math.nan,
        floor_fraction=floored / (usable + floored),
    )


def shift_scan_order(m_max: int):
    """0, +1, -1, +2, -2, ... out to +-m_max (positive first on ties)."""
    yield 0
    for m in range(1, m_max + 1):
        yield m
        yield -m


def _window_is_good(g: GreensMatrix, params: ModelParams, n_sites: int,
                    rate_floor: float, r2_min: float) -> bool:
    if params.eps > 0.0:
        sup_bound = math.exp(0.5 * params.symbol.rho * params.eps ** (1.0 / 40.0) * n_sites)
        if float(np.max(np.abs(g.values))) > sup_bound:
            return False
    try:
        fit = decay_fit(g, predicted_decay(params, n_sites))
    except DegenerateFitError:
        off_diag = g.values[~np.eye(g.side, dtype=bool)]
        return bool(np.all(np.abs(off_diag) <= DECAY_FLOOR))  # exact diagonal decay
    return fit.rate >= rate_floor and fit.r2 >= r2_min


def find_good_shift(params: ModelParams, x: float, n_sites: int,
                    rate_floor: float | None = None, m_max: int | None = None,
                    r2_min: float = 0.0, base: int = 0) -> int | None:
    """First shift m (in scan order) whose window [0,N)+base+m passes the decay test.

    Passing means a fitted rate at least ``rate_floor`` (default rho/4) plus,
    for positive coupling, the sup-entry bound exp(c0 eps^(1/40) N).  Absence
    is a value: ``None`` feeds the bad-set statistics.
    """
    if n_sites < 16:
        raise ValueError("find_good_shift: n_sites must be >= 16")
    if rate_floor is None:
        rate_floor = params.symbol.rho / 4.0
    if m_max is None:
        m_max = math.isqrt(n_sites)
    for m in shift_scan_order(m_max):
        lo = base + m
        try:
            g = greens_function(assemble_window(params, x, (lo, lo + n_sites - 1)))
        except ResonanceError:
            continue
        if _window_is_good(g, params, n_sites, rate_floor, r2_min):
            return m
    return None


@dataclass(frozen=True)
class MinorBoundReport:
    n: int
    n_prime: int
    lhs_log: float
    rhs_log: float
    slack_log: float
    passed: bool


def minor_bound_check(window: OperatorWindow, n: int, n_prime: int) -> MinorBoundReport:
    """Cofactor minor of B against the combinatorial upper bound.

    The bound is exp(N/2 log(E^2+1) - N log 2 + eps^0.45 N) times
    (exp(2 eps^(1/20) N - rho d) + exp(-rho d / 2)) at distance d = |n - n'|;
    the 0.45 exponent pins the just-below-one-half convention.
    """
    side = window.side
    if side > ORACLE_MAX_SIDE:
        raise ValueError(f"minor_bound_check: side {side} exceeds {ORACLE_MAX_SIDE}")
    p = window.params
    b = window.b_matrix
    minor = np.delete(np.delete(b, n, axis=0), n_prime, axis=1)
    lhs = abs(det_cofactor(minor))
    lhs_log = math.log(lhs) if lhs > 0.0 else -math.inf
    d = abs(n - n_prime)
    rho = p.symbol.rho
    eps = p.eps
    rhs_log = (0.5 * side * math.log1p(p.E**2) - side * math.log(2.0)
               + (eps**HALF_MINUS_EXPONENT) * side
               + np.logaddexp(2.0 * (eps ** (1.0 / 20.0)) * side - rho * d, -0.5 * rho * d))
    return MinorBoundReport(
        n=n, n_prime=n_prime, lhs_log=lhs_log, rhs_log=float(rhs_log),
        slack_log=float(rhs_log - lhs_log), passed=bool(lhs_log < rhs_log),
    )
