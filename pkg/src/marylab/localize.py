"""Spectral diagnostics on symmetric windows: localization rates, spectral distances,
cross-scale eigenvector stability, and orbit hits of measured bad sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arithmetic import Frequency, torus_norm
from .model import SINGULARITY_TOL, ModelParams, hamiltonian, site_phases

DECAY_FLOOR = 1e-300


class SingularWindowError(RuntimeError):
    """A site of the window sits within tolerance of a tangent pole."""

    def __init__(self, site: int, distance: float):
        super().__init__(f"site {site} sits {distance:.3e} from a tangent pole")
        self.site = site
        self.distance = distance


def fit_vector_rate(vec: np.ndarray, sites: np.ndarray, center: int, outer_from: float,
                    floor: float = DECAY_FLOOR) -> float:
    """Least-squares decay rate of log|v| vs |site - center| over the outer sites.

    Sites with |site| >= outer_from enter the fit; entries below ``floor``
    are dropped.  All outer entries below the floor (delta-like vector, or
    decay faster than the floor resolves) gives +inf.
    """
    outer = np.abs(sites) >= outer_from
    mags = np.abs(vec[outer])
    good = mags > floor
    d = np.abs(sites[outer] - center).astype(float)
    if not np.any(good & (d > 2.0)):
        return math.inf  # no measurable tail beyond the immediate peak
    if np.count_nonzero(good) < 4 or np.ptp(d[good]) == 0.0:
        return math.nan
    slope = np.polyfit(d[good], np.log(mags[good]), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class EigenReport:
    params: ModelParams
    x: float
    half_width: int
    sites: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray  # column j pairs with energies[j]
    decay_rates: np.ndarray
    mass_centers: np.ndarray
    in_cap: np.ndarray
    residual_max: float
    noise_floor: float
    tail_below_floor: np.ndarray  # per vector, fraction of outer entries under the floor


def eigensystem(params: ModelParams, x: float, half_width: int) -> EigenReport:
    """Full Hermitian eigendecomposition of H on [-N, N] with localization fits.

    Refuses windows with a site within tolerance of a tangent pole (the
    caller shrinks or shifts).  Eigenvector signs are fixed so output is
    deterministic; rates are fitted over the outer half of the window.
    """
    interval = (-half_width, half_width)
    sites = np.arange(interval[0], interval[1] + 1)
    dists = torus_norm(site_phases(x, interval, params.freq.omega) - 0.5)
    worst = int(np.argmin(dists))
    if dists[worst] < SINGULARITY_TOL:
        raise SingularWindowError(int(sites[worst]), float(dists[worst]))

    h = hamiltonian(params, x, interval)
    energies, vectors = np.linalg.eigh(h)

    # deterministic gauge: first significant component positive (real part)
    n_side = len(sites)
    for j in range(n_side):
        col = vectors[:, j]
        lead = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        if len(lead):
            ref = col[lead[0]]
            if (ref.real if np.iscomplexobj(col) else ref) < 0.0:
                vectors[:, j] = -col

    centers = sites[np.argmax(np.abs(vectors), axis=0)]
    # eigh components carry an additive noise floor ~ eps * ||H||_2; entries
    # below it are orthogonalization residue, not decay signal
    floor = max(DECAY_FLOOR, n_side * np.finfo(float).eps * float(np.max(np.abs(energies))))
    rates = np.array([
        fit_vector_rate(vectors[:, j], sites, int(centers[j]), half_width / 2.0, floor)
        for j in range(n_side)
    ])
    outer = np.abs(sites) >= half_width / 2.0
    tail = np.mean(np.abs(vectors[outer, :]) <= floor, axis=0)
    resid = float(np.max(np.abs(h @ vectors - vectors * energies[None, :])))
    return EigenReport(
        params=params, x=float(x), half_width=half_width, sites=sites,
        energies=energies, vectors=vectors, decay_rates=rates,
        mass_centers=centers, in_cap=np.abs(energies) <= params.C0,
        residual_max=resid, noise_floor=floor, tail_below_floor=tail,
    )


def spectral_distance(params: ModelParams, x: float, half_width: int, energy: float,
                      report: EigenReport | None = None) -> float:
    """min over window eigenvalues of |energy - E_j|."""
    if report is None:
        report = eigensystem(params, x, half_width)
    return float(np.min(np.abs(report.energies - energy)))


@dataclass(frozen=True)
class ShnolReport:
    refused: bool
    reason: str
    scales: tuple[int, ...]
    weighted_sups: tuple[float, ...]
    overlaps: tuple[float, ...]
    bounded: bool


def shnol_decay_test(params: ModelParams, x: float, energy: float,
                     half_widths, energy_tol: float = 1e-6,
                     overlap_min: float = 0.9, growth_cap: float = 10.0) -> ShnolReport:
    """Track one eigenvector across window scales and test its weighted sup.

    The candidate energy must sit within ``energy_tol`` of an eigenvalue at
    every scale; vectors are matched across scales by core overlap (below
    ``overlap_min`` is an ambiguity refusal).  With the vector normalized to
    1 at its mass center, sup_n |v_n| exp(rho/4 |n|) over the common core
    must stay within ``growth_cap`` across the ladder.
    """
    ladder = sorted(int(n) for n in half_widths)
    core = ladder[0]
    rho = params.symbol.rho
    prev = None
    sups, overlaps = [], []
    for n_half in ladder:
        rep = eigensystem(params, x, n_half)
        if prev is None:
            j = int(np.argmin(np.abs(rep.energies - energy)))
            if abs(rep.energies[j] - energy) > energy_tol:
                return ShnolReport(True, f"no eigenvalue within {energy_tol} at scale {n_half}",
                                   (), (), (), False)
        else:
            prev_core, prev_sites = prev
            lo = n_half - core
            cand = rep.vectors[lo:lo + len(prev_sites), :]
            norms = np.linalg.norm(cand, axis=0) * np.linalg.norm(prev_core)
            with np.errstate(invalid="ignore", divide="ignore"):
                ol = np.abs(np.conj(prev_core) @ cand) / np.where(norms == 0.0, 1.0, norms)
            j = int(np.argmax(ol))
            if abs(rep.energies[j] - energy) > energy_tol:
                return ShnolReport(True, f"tracked eigenvalue drifted past {energy_tol} at scale {n_half}",
                                   (), (), (), False)
            overlaps.append(float(ol[j]))
            if ol[j] < overlap_min:
                return ShnolReport(True, f"overlap {ol[j]:.3f} < {overlap_min} at scale {n_half}",
                                   tuple(ladder), tuple(sups), tuple(overlaps), False)
        vec = rep.vectors[:, j]
        center = int(rep.mass_centers[j])
        peak = vec[center + n_half]
        vec = vec / peak
        core_slice = vec[(n_half - core):(n_half + core + 1)]
        core_sites = np.arange(-core, core + 1)
        sups.append(float(np.max(np.abs(core_slice) * np.exp(0.25 * rho * np.abs(core_sites)))))
        prev = (core_slice, core_sites)
    bounded = max(sups) <= growth_cap * min(sups)
    return ShnolReport(False, "", tuple(ladder), tuple(sups), tuple(overlaps), bounded)


@dataclass(frozen=True)
class OrbitHitReport:
    hits: int
    horizon: int
    exponent: float
    passed: bool


def _hits_scan(points: np.ndarray, intervals) -> np.ndarray:
    mask = np.zeros(len(points), dtype=bool)
    for lo, hi in intervals:
        mask |= (points >= lo) & (points <= hi)
    return mask


def _hits_bisect(points: np.ndarray, intervals) -> np.ndarray:
    if not intervals:
        return np.zeros(len(points), dtype=bool)
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    starts = np.array([iv[0] for iv in merged])
    ends = np.array([iv[1] for iv in merged])
    idx = np.searchsorted(starts, points, side="right") - 1
    ok = idx >= 0
    out = np.zeros(len(points), dtype=bool)
    out[ok] = points[ok] <= ends[idx[ok]]
    return out


def orbit_hit_count(bad_set, x0: float, freq: Frequency, horizon: int,
                    delta_min: float = 0.05) -> OrbitHitReport:
    """Exact count of orbit points x0 + k*omega (mod 1), k = 1..horizon, inside the bad set.

    The implied exponent log(hits)/log(horizon) passes below 1 - delta_min;
    an empty intersection reports a zero exponent sentinel.
    """
    if horizon < 1:
        raise ValueError("orbit_hit_count: horizon must be >= 1")
    k = np.arange(1, horizon + 1)
    pts = np.mod(x0 + k * freq.omega, 1.0)
    hits = int(np.count_nonzero(_hits_scan(pts, tuple(bad_set))))
    exponent = 0.0 if hits == 0 else math.log(hits) / math.log(horizon)
    return OrbitHitReport(hits=hits, horizon=horizon, exponent=exponent,
                          passed=bool(exponent < 1.0 - delta_min))
