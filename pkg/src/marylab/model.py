"""Long-range symbol, truncated windows of H(x) - E, and their cosine regularization.

The lattice operator is H(x)(n,n') = tan(pi(x+n*omega)) delta_{nn'} + eps*phihat(n-n').
All window computations go through the regularized matrix

    B(n,n') = cos(pi(x+n*omega)) * (H(x)-E)(n,n'),

which stays finite at the tangent poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .arithmetic import Frequency, torus_norm

#: coefficients decaying below this are dropped from the symbol support
COEFF_FLOOR = 1e-16

#: reporting threshold on ||x + n*omega - 1/2|| (the B side never divides by cos)
SINGULARITY_TOL = 1e-8


@dataclass(frozen=True)
class LongRangeSymbol:
    """Finitely supported Fourier coefficients with verified decay.

    Every stored coefficient satisfies |phihat(n)| < exp(-rho*|n|) strictly,
    and phihat(-n) = conj(phihat(n)) so the hopping operator is Hermitian.
    """

    rho: float
    coeffs: dict[int, complex]
    l1_norm: float
    truncation_radius: int

    def coefficient(self, n: int) -> complex:
        return self.coeffs.get(n, 0.0)

    @property
    def is_real_even(self) -> bool:
        return all(
            v.imag == 0.0 and self.coeffs.get(-n, 0.0) == v
            for n, v in self.coeffs.items()
        )

    def taps(self) -> np.ndarray:
        """Real coefficients at offsets 0..truncation_radius (real even symbols only)."""
        if not self.is_real_even:
            raise ValueError("taps: symbol is not real and even")
        r = self.truncation_radius
        return np.array([self.coefficient(d).real for d in range(r + 1)])

    def dense(self, n_sites: int) -> np.ndarray:
        """Dense Toeplitz hopping matrix S(n,n') = phihat(n-n')."""
        col = np.array([self.coefficient(n) for n in range(n_sites)])
        row = np.array([self.coefficient(-n) for n in range(n_sites)])
        s = scipy.linalg.toeplitz(col, row)
        return s.real.copy() if self.is_real_even else s


def build_symbol(rho: float, rule: str = "exp_decay", *, decay: float | None = None,
                 margin: float = 0.99, coeffs: dict[int, complex] | None = None) -> LongRangeSymbol:
    """Construct a symbol from a coefficient rule and verify its decay.

    Rules:
      - ``exp_decay``: phihat(n) = margin * exp(-decay*|n|) with decay >= rho,
        truncated once the coefficient bound drops below ``COEFF_FLOOR``.
      - ``nearest_neighbor``: phihat(+-1) = margin * exp(-rho), zero elsewhere.
      - ``explicit``: coefficients given as a dict keyed by offset.
    """
    if rho <= 0.0:
        raise ValueError("build_symbol: rho must be positive")
    if rule == "exp_decay":
        d = rho if decay is None else decay
        if d < rho:
            raise ValueError("build_symbol: exp_decay rate must be >= rho")
        radius = math.ceil(math.log(margin / COEFF_FLOOR) / d)
        table = {n: margin * math.exp(-d * abs(n)) for n in range(-radius, radius + 1)}
    elif rule == "nearest_neighbor":
        v = margin * math.exp(-rho)
        table = {-1: v, 1: v}
        radius = 1
    elif rule == "explicit":
        if coeffs is None:
            raise ValueError("build_symbol: explicit rule needs coeffs")
        table = {int(n): complex(v) for n, v in coeffs.items()}
        for n, v in table.items():
            if table.get(-n, 0.0) != v.conjugate():
                raise ValueError(f"build_symbol: coefficients not Hermitian at n={n}")
        radius = max((abs(n) for n in table), default=0)
    else:
        raise ValueError(f"build_symbol: unknown rule {rule!r}")

    for n, v in table.items():
        if not abs(v) < math.exp(-rho * abs(n)):
            raise ValueError(
                f"build_symbol: |phihat({n})| = {abs(v):.6g} violates the decay bound "
                f"exp(-rho*|n|) = {math.exp(-rho * abs(n)):.6g}"
            )
    clean = {n: (complex(v) if isinstance(v, complex) else complex(float(v))) for n, v in table.items()}
    l1 = float(sum(abs(v) for v in clean.values()))
    return LongRangeSymbol(rho=float(rho), coeffs=clean, l1_norm=l1, truncation_radius=int(radius))


@dataclass(frozen=True)
class EpsilonBudget:
    """Largest coupling passing both smallness constraints, with the slack of each."""

    eps_hat: float
    l1_slack: float
    rate_slack: float
    empty: bool
    binding: str


def _entropy(x: float) -> float:
    """-(1-x)log(1-x) - x log(x) on (0,1), extended by 0 at the endpoints."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -(1.0 - x) * math.log1p(-x) - x * math.log(x)


def epsilon_budget(rho: float, symbol: LongRangeSymbol, floor: float = 1e-12) -> EpsilonBudget:
    """Bisect for the largest eps <= 1/2 satisfying both smallness constraints.

    Constraint 1: eps * l1_norm < 1 (the hopping perturbation stays a strict
    contraction).  Constraint 2: with t = eps^(1/20),
    rho - entropy(t) - t*log(2) > rho/2 (the path-counting rate survives with
    half the decay).  The result is a heuristic stand-in for the unspecified
    admissible coupling: ``empty`` is set when nothing above ``floor`` passes.
    """
    if rho <= 0.0:
        raise ValueError("epsilon_budget: rho must be positive")

    def ok(eps: float) -> bool:
        if eps * symbol.l1_norm >= 1.0:
            return False
        t = eps ** 0.05
        return rho - _entropy(t) - t * math.log(2.0) > 0.5 * rho

    hi = 0.5
    if ok(hi):
        eps_hat, binding = hi, "cap"
    else:
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        eps_hat = lo
        binding = "l1" if hi * symbol.l1_norm >= 1.0 else "rate"
    t = eps_hat ** 0.05 if eps_hat > 0.0 else 0.0
    return EpsilonBudget(
        eps_hat=eps_hat,
        l1_slack=1.0 - eps_hat * symbol.l1_norm,
        rate_slack=rho - _entropy(t) - t * math.log(2.0) - 0.5 * rho,
        empty=eps_hat <= floor,
        binding=binding,
    )


@dataclass(frozen=True)
class ModelParams:
    """Frequency, symbol, coupling and energy for one operator family."""

    freq: Frequency
    symbol: LongRangeSymbol
    eps: float
    E: float
    C0: float = 5.0
    eps0_budget: EpsilonBudget | None = None

    def __post_init__(self):
        if self.eps < 0.0:
            raise ValueError("ModelParams: eps must be nonnegative")
        if self.eps * self.symbol.l1_norm >= 1.0:
            raise ValueError(
                f"ModelParams: eps*l1 = {self.eps * self.symbol.l1_norm:.6g} must stay below 1"
            )
        if abs(self.E) > self.C0:
            raise ValueError(f"ModelParams: |E| = {abs(self.E):.6g} exceeds the cap C0 = {self.C0:.6g}")

    def window_taps(self) -> np.ndarray:
        """Offset coefficients of B's cosine factor: taps[0] = eps*phihat(0) - E, taps[d] = eps*phihat(d)."""
        t = self.eps * self.symbol.taps()
        t[0] -= self.E
        return t


def site_phases(x: float, interval: tuple[int, int], omega: float) -> np.ndarray:
    """Reduced phases x + n*omega - round(.) for n in the integer interval."""
    n = np.arange(interval[0], interval[1] + 1)
    th = x + n * omega
    return th - np.round(th)


@dataclass(frozen=True)
class OperatorWindow:
    """A finite restriction of H(x) - E together with its cosine regularization.

    ``h_minus_e`` carries +-inf sentinels on the diagonal at sites within
    ``SINGULARITY_TOL`` of a tangent pole; ``b_matrix`` is finite everywhere.
    """

    interval: tuple[int, int]
    x: float
    params: ModelParams
    h_minus_e: np.ndarray
    b_matrix: np.ndarray
    cos_diag: np.ndarray
    singular_flag: bool

    @property
    def side(self) -> int:
        return self.interval[1] - self.interval[0] + 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.interval[0], self.interval[1] + 1)


def assemble_window(params: ModelParams, x: float, interval: tuple[int, int]) -> OperatorWindow:
    """Populate both H-E and B on the interval; singularity is a flag, not an error."""
    a, b = int(interval[0]), int(interval[1])
    if b < a:
        raise ValueError("assemble_window: interval must satisfy b >= a")
    th = site_phases(x, (a, b), params.freq.omega)
    s = np.sin(np.pi * th)
    c = np.cos(np.pi * th)
    n_sites = b - a + 1
    idx = np.arange(n_sites)

    k_matrix = params.eps * params.symbol.dense(n_sites)
    k_matrix[idx, idx] -= params.E

    b_matrix = c[:, None] * k_matrix
    b_matrix[idx, idx] += s

    pole_dist = torus_norm(th - 0.5)
    sing_mask = pole_dist < SINGULARITY_TOL
    with np.errstate(divide="ignore"):
        tan = s / c
    tan = np.where(sing_mask, np.copysign(np.inf, s) * np.sign(np.where(c == 0.0, 1.0, c)), tan)

    h = k_matrix.astype(b_matrix.dtype, copy=True)
    h[idx, idx] += tan

    b_matrix.setflags(write=False)
    h.setflags(write=False)
    c.setflags(write=False)
    return OperatorWindow(
        interval=(a, b), x=float(x), params=params,
        h_minus_e=h, b_matrix=b_matrix, cos_diag=c,
        singular_flag=bool(np.any(sing_mask)),
    )


def hamiltonian(params: ModelParams, x: float, interval: tuple[int, int]) -> np.ndarray:
    """Dense H(x) on the interval (no energy shift); caller must avoid tangent poles."""
    a, b = int(interval[0]), int(interval[1])
    th = site_phases(x, (a, b), params.freq.omega)
    n_sites = b - a + 1
    idx = np.arange(n_sites)
    h = params.eps * params.symbol.dense(n_sites)
    h[idx, idx] += np.tan(np.pi * th)
    return h


def singularity_distance(freq: Frequency, x: float, interval: tuple[int, int]) -> float:
    """min over n in the interval of ||x + n*omega - 1/2||."""
    th = site_phases(x, (int(interval[0]), int(interval[1])), freq.omega)
    return float(np.min(torus_norm(th - 0.5)))
