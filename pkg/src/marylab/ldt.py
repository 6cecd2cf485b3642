"""Floored log-determinant density, Fejér-weighted averages, and deviation measurement.

The central observable is

    u(x) = (1/N) log(|det B_N(x)| + 10^(-N)),

whose grid samples feed the mean estimate, the Fourier decay check, and the
measured deviation sets of the Fejér-averaged field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arithmetic import Frequency
from .determinant import log_abs_det
from .kernels import batch_logabsdet
from .model import ModelParams, assemble_window

LOG10 = math.log(10.0)


def logdet_density(params: ModelParams, n_sites: int, x: float) -> float:
    """u(x) for the window [0, n_sites), computed in log space (no underflow)."""
    if n_sites < 1:
        raise ValueError("logdet_density: n_sites must be >= 1")
    w = assemble_window(params, x, (0, n_sites - 1))
    ld = log_abs_det(w.b_matrix)
    return float(np.logaddexp(ld.log_abs, -n_sites * LOG10) / n_sites)


def logdet_density_many(params: ModelParams, n_sites: int, xs, threads: int = 1) -> np.ndarray:
    """Vectorized u over an array of points, through the batch kernel."""
    xs = np.ascontiguousarray(xs, dtype=float)
    if params.symbol.is_real_even:
        la = batch_logabsdet(xs, n_sites, params.freq.omega, params.window_taps(), threads=threads)
    else:
        la = np.array([
            log_abs_det(assemble_window(params, float(x), (0, n_sites - 1)).b_matrix).log_abs
            for x in xs
        ])
    return np.logaddexp(la, -n_sites * LOG10) / n_sites


def midpoint_grid(grid_pts: int) -> np.ndarray:
    """Uniform torus grid at the cell midpoints (j+1/2)/G.

    The half-step offset keeps exactly singular samples (x = 0 for the
    classical log|2 sin pi x| test function) off the grid.
    """
    return (np.arange(grid_pts) + 0.5) / grid_pts


def subharmonic_bound(params: ModelParams) -> float:
    """Crude sup bound for the subharmonic extension of u on the unit strip.

    Hadamard row bounds give |B entries| <= e^(pi |Im z|) (1 + |E| + eps*l1 + l1)
    per site, and the floor keeps u above -log 10.
    """
    s = params.symbol
    return max(LOG10, math.pi + math.log(s.l1_norm + 1.0 + abs(params.E) + params.eps * s.l1_norm))


@dataclass(frozen=True)
class SubharmonicSample:
    """Grid samples of u plus its Fourier coefficients up to k_max."""

    grid: np.ndarray
    values: np.ndarray
    bound_B: float
    fourier: np.ndarray  # uhat(k), k = 0..k_max (u real, so uhat(-k) = conj)
    k_max: int


def sample_logdet_density(params: ModelParams, n_sites: int, grid_pts: int,
                          threads: int = 1, values=None) -> SubharmonicSample:
    """Sample u on the midpoint grid and attach FFT coefficients below Nyquist/2."""
    xs = midpoint_grid(grid_pts)
    if values is None:
        values = logdet_density_many(params, n_sites, xs, threads=threads)
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("sample_logdet_density: the floor should keep every value finite")
    k_max = grid_pts // 4
    spec = np.fft.rfft(values)[: k_max + 1] / grid_pts
    spec *= np.exp(-1j * np.pi * np.arange(k_max + 1) / grid_pts)  # midpoint phase
    return SubharmonicSample(
        grid=xs, values=values, bound_B=subharmonic_bound(params),
        fourier=spec, k_max=k_max,
    )


def fejer_weights(m_window: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets -(M-1)..(M-1) and triangular weights (M-|m|)/M^2 (sum exactly 1)."""
    if m_window < 1:
        raise ValueError("fejer_weights: window must be >= 1")
    offs = np.arange(-(m_window - 1), m_window)
    return offs, (m_window - np.abs(offs)) / m_window**2


def fejer_average(u_eval, x: float, omega, m_window: int) -> float:
    """Triangular-weighted orbit average sum_m (M-|m|)/M^2 u(x + m*omega)."""
    w = getattr(omega, "omega", omega)
    offs, weights = fejer_weights(m_window)
    return float(sum(wt * u_eval(x + o * w) for o, wt in zip(offs, weights)))


def fejer_kernel_closed(theta, m_window: int):
    """(1/M^2) (sin(pi M theta)/sin(pi theta))^2 with torus-reduced arguments."""
    th = np.asarray(theta, dtype=float)
    num = np.sin(np.pi * (m_window * th - np.round(m_window * th)))
    den = np.sin(np.pi * (th - np.round(th)))
    out = np.where(den == 0.0, 1.0, (num / np.where(den == 0.0, 1.0, den)) ** 2 / m_window**2)
    return float(out) if out.ndim == 0 else out


def fejer_kernel_direct(theta, m_window: int):
    """The same kernel as the explicit weighted exponential sum (reference path)."""
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    th = th - np.round(th)
    offs, weights = fejer_weights(m_window)
    vals = np.cos(2.0 * np.pi * np.outer(offs, th)) * weights[:, None]
    out = vals.sum(axis=0)
    return float(out[0]) if np.isscalar(theta) else out


@dataclass(frozen=True)
class FejerKernelReport:
    m_window: int
    k_max: int
    worst_k: int
    worst_margin: float  # min over k of bound - kernel (positive = strict bound holds)
    max_closed_vs_direct: float
    nonnegative: bool
    passed: bool


def fejer_kernel_bound_check(freq: Frequency, m_window: int, k_max: int,
                             rel_slack: float = 1e-12) -> FejerKernelReport:
    """Verify kernel(k*omega) < 1/(1 + M^2 ||k*omega||^2) for 1 <= k <= k_max."""
    if k_max < 1:
        raise ValueError("fejer_kernel_bound_check: k_max must be >= 1")
    k = np.arange(1, k_max + 1, dtype=float)
    # reduce k*omega once; both kernel forms are 1-periodic, and evaluating
    # them at the same reduced phase is what makes them comparable to 1e-12
    # (the raw argument k*omega carries a k*eps reduction error)
    theta = k * freq.omega
    theta -= np.round(theta)
    kern = fejer_kernel_closed(theta, m_window)
    t = np.abs(theta)
    bound = 1.0 / (1.0 + m_window**2 * t**2)
    margin = bound - kern
    worst = int(np.argmin(margin))
    ok = bool(np.all(kern < bound * (1.0 + rel_slack)))

    # compare the closed form against the direct weighted sum everywhere
    direct = fejer_kernel_direct(theta, m_window)
    closed = kern
    return FejerKernelReport(
        m_window=m_window, k_max=k_max, worst_k=worst + 1,
        worst_margin=float(margin[worst]),
        max_closed_vs_direct=float(np.max(np.abs(direct - closed))),
        nonnegative=bool(np.all(kern >= 0.0)),
        passed=ok,
    )


def mean_estimate(sample: SubharmonicSample) -> float:
    """Uniform (periodic trapezoid) average of u over the grid."""
    if len(sample.values) < 256:
        raise ValueError("mean_estimate: grid must have >= 256 points")
    return float(np.mean(sample.values))


@dataclass(frozen=True)
class MeanBoundReport:
    estimate: float
    lower_bound: float
    slack: float


def mean_bound_report(sample: SubharmonicSample, params: ModelParams) -> MeanBoundReport:
    """Mean of u against (1/2)log(1+E^2) - log 2 + log(1 - eps*l1)."""
    est = mean_estimate(sample)
    bound = (0.5 * math.log1p(params.E**2) - math.log(2.0)
             + math.log1p(-params.eps * params.symbol.l1_norm))
    return MeanBoundReport(estimate=est, lower_bound=bound, slack=est - bound)


@dataclass(frozen=True)
class DeviationProfile:
    """Measured deviation of the Fejér-averaged field from the mean estimate."""

    m_window: int
    sigma: float
    threshold: float
    grid: np.ndarray
    u_values: np.ndarray
    v_values: np.ndarray
    u_hat0: float
    bad_flags: np.ndarray
    bad_fraction: float
    bad_set: tuple[tuple[float, float], ...]
    c_tilde: float


def _flag_runs(grid: np.ndarray, flags: np.ndarray) -> tuple[tuple[float, float], ...]:
    """Maximal runs of flagged grid points as closed intervals, merging across the seam."""
    g = len(flags)
    if not flags.any():
        return ()
    if flags.all():
        return ((0.0, 1.0),)
    idx = np.flatnonzero(flags)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    ends = np.concatenate([idx[breaks], [idx[-1]]])
    runs = list(zip(starts.tolist(), ends.tolist()))
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == g - 1:
        first = runs.pop(0)
        last = runs.pop()
        runs.append((last[0], first[1]))  # wraps; split into two plain intervals below
        return tuple(
            iv
            for a, b in runs
            for iv in ([(float(grid[a]), float(grid[b]))] if a <= b
                       else [(float(grid[a]), 1.0), (0.0, float(grid[b]))])
        )
    return tuple((float(grid[a]), float(grid[b])) for a, b in runs)


def deviation_profile(params: ModelParams, n_sites: int, m_window: int | None = None,
                      grid_pts: int = 2**14, sigma: float | None = None,
                      threshold: float | None = None, threads: int = 1,
                      u_many=None) -> DeviationProfile:
    """Evaluate the Fejér-averaged density on the grid and measure its bad set.

    ``u_many`` may inject a test double (callable of a point array); by
    default u comes from the batch kernel.  The decay constant is fitted
    from bad_fraction = exp(-c * M^sigma) and reported as +inf when the
    measured bad set is empty.
    """
    if grid_pts < 4096:
        raise ValueError("deviation_profile: grid must have >= 4096 points")
    if m_window is None:
        m_window = round(math.sqrt(n_sites))
    if sigma is None:
        sigma = 1.0 / (50.0 * params.freq.A)
    if threshold is None:
        threshold = float(m_window) ** (-sigma)
    if u_many is None:
        def u_many(pts):
            return logdet_density_many(params, n_sites, pts, threads=threads)

    xs = midpoint_grid(grid_pts)
    offs, weights = fejer_weights(m_window)
    rows = np.empty((len(offs), grid_pts))
    for i, o in enumerate(offs):
        rows[i] = u_many(xs + o * params.freq.omega)
    v = weights @ rows
    u0 = rows[m_window - 1]  # offset 0 row
    u_hat0 = float(np.mean(u0))
    flags = np.abs(v - u_hat0) > threshold
    frac = float(np.count_nonzero(flags)) / grid_pts
    c_tilde = math.inf if frac == 0.0 else -math.log(frac) / float(m_window) ** sigma
    return DeviationProfile(
        m_window=m_window, sigma=sigma, threshold=threshold,
        grid=xs, u_values=u0, v_values=v, u_hat0=u_hat0,
        bad_flags=flags, bad_fraction=frac,
        bad_set=_flag_runs(xs, flags), c_tilde=c_tilde,
    )


@dataclass(frozen=True)
class FourierDecayReport:
    max_scaled: float  # max over k of |k| |uhat(k)| / B
    argmax_k: int
    bound_B: float
    k_max: int
    passed: bool


def fourier_decay_report(sample: SubharmonicSample, c_bound: float = 10.0) -> FourierDecayReport:
    """max over 1 <= k <= k_max of |k||uhat(k)|/B, passing below the empirical constant."""
    if sample.k_max < 64:
        raise ValueError("fourier_decay_report: need Fourier data up to k >= 64")
    k = np.arange(1, sample.k_max + 1)
    scaled = k * np.abs(sample.fourier[1:]) / sample.bound_B
    j = int(np.argmax(scaled))
    return FourierDecayReport(
        max_scaled=float(scaled[j]), argmax_k=j + 1,
        bound_B=sample.bound_B, k_max=sample.k_max,
        passed=bool(scaled[j] <= c_bound),
    )


@dataclass(frozen=True)
class MeasureRefinementReport:
    eps0: float
    eps1: float
    hypothesis_fraction: float
    hypothesis_ok: bool
    conclusion_fraction: float
    c_fitted: float
    passed: bool


def measure_refinement_report(sample: SubharmonicSample, eps0: float, eps1: float) -> MeasureRefinementReport:
    """Measure-refinement check on the grid, after affine rescaling to |u| <= 1.

    Hypothesis: the fraction with |u - mean| > eps0 stays below eps1.
    Conclusion: the fraction above sqrt(eps0) fits a positive constant in
    exp(-c / (sqrt(eps0) + sqrt(eps1 B / eps0))).
    """
    vals = sample.values
    center = 0.5 * (vals.max() + vals.min())
    half = 0.5 * (vals.max() - vals.min())
    if half == 0.0:
        return MeasureRefinementReport(eps0, eps1, 0.0, True, 0.0, math.inf, True)
    u = (vals - center) / half
    b_norm = (sample.bound_B + abs(center)) / half
    mean = float(np.mean(u))
    hyp = float(np.mean(np.abs(u - mean) > eps0))
    if hyp >= eps1:
        return MeasureRefinementReport(eps0, eps1, hyp, False, math.nan, math.nan, False)
    concl = float(np.mean(np.abs(u - mean) > math.sqrt(eps0)))
    denom = math.sqrt(eps0) + math.sqrt(eps1 * b_norm / eps0)
    c = math.inf if concl == 0.0 else -math.log(concl) * denom
    return MeasureRefinementReport(eps0, eps1, hyp, True, concl, c, bool(c > 0.0))
