"""Quantitative equidistribution checks for the circle rotation.

Resonance counting along the orbit, Birkhoff sums of the regularized
log|cos|, and the near-singular integral bounds they rest on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .arithmetic import Frequency, torus_norm


@dataclass(frozen=True)
class EnergyPhase:
    """Rotation absorbing the energy: sin(pi a) = 1/sqrt(E^2+1), cos(pi a) = E/sqrt(E^2+1)."""

    energy: float
    alpha: float


def energy_phase(energy: float) -> EnergyPhase:
    if not math.isfinite(energy):
        raise ValueError("energy_phase: energy must be finite")
    return EnergyPhase(float(energy), math.atan2(1.0, energy) / math.pi)


def near_resonance_count(freq: Frequency, x: float, phase: EnergyPhase,
                         n_steps: int, kappa: float) -> int:
    """#{k in [0, n_steps) : ||x + k*omega + alpha - 1/2|| < kappa}, by exact scan."""
    if n_steps < 1:
        raise ValueError("near_resonance_count: n_steps must be >= 1")
    if not 0.0 <= kappa <= 0.5:
        raise ValueError("near_resonance_count: kappa must lie in [0, 1/2]")
    k = np.arange(n_steps)
    d = torus_norm(x + k * freq.omega + phase.alpha - 0.5)
    return int(np.count_nonzero(d < kappa))


@dataclass(frozen=True)
class BirkhoffReport:
    n_steps: int
    orbit_mean: float
    integral: float
    discrepancy: float
    ladder: tuple[tuple[int, float], ...]
    delta_hat: float


def _log_cos_integral(eta: float) -> float:
    val, _ = scipy.integrate.quad(
        lambda t: math.log(abs(math.cos(math.pi * t)) + eta), 0.0, 1.0,
        points=[0.5], limit=200,
    )
    return val


def birkhoff_log_cos(freq: Frequency, x: float, phase: EnergyPhase,
                     n_steps: int, eta: float) -> BirkhoffReport:
    """Orbit averages of log(|cos(pi .)| + eta) against the integral, over an N-ladder.

    The ladder runs through powers of two from 2^8 up to n_steps; the decay
    exponent delta_hat is the fitted slope of log(discrepancy) vs log(N).
    """
    if eta <= 0.0:
        raise ValueError("birkhoff_log_cos: eta must be positive")
    integral = _log_cos_integral(eta)

    def orbit_mean(n):
        k = np.arange(n)
        th = x + k * freq.omega + phase.alpha
        th -= np.round(th)
        return float(np.mean(np.log(np.abs(np.cos(np.pi * th)) + eta)))

    ladder = []
    n = 256
    while n <= n_steps:
        ladder.append((n, abs(orbit_mean(n) - integral)))
        n *= 2
    mean_n = orbit_mean(n_steps)
    if len(ladder) >= 3 and all(d > 0.0 for _, d in ladder):
        lg_n = np.log([float(a) for a, _ in ladder])
        lg_d = np.log([d for _, d in ladder])
        delta_hat = -float(np.polyfit(lg_n, lg_d, 1)[0])
    else:
        delta_hat = math.nan
    return BirkhoffReport(
        n_steps=n_steps, orbit_mean=mean_n, integral=integral,
        discrepancy=abs(mean_n - integral),
        ladder=tuple(ladder), delta_hat=delta_hat,
    )


@dataclass(frozen=True)
class SingularIntegralReport:
    etas: tuple[float, ...]
    integrals: tuple[float, ...]
    sqrt_ratios: tuple[float, ...]       # I(eta)/sqrt(eta)
    etalog_ratios: tuple[float, ...]     # I(eta)/(eta log(1/eta)), the scale that is actually stable
    fitted_c: float                      # max sqrt ratio: smallest C with I <= C sqrt(eta) on the ladder
    sqrt_stable: bool                    # every sqrt ratio within +-20% of fitted_c
    quad_errors: tuple[float, ...]
    lebesgue_epsilons: tuple[float, ...]
    lebesgue_measures: tuple[float, ...]
    lebesgue_ok: bool


def singular_integral_check(eta: float | None = None) -> SingularIntegralReport:
    """I(eta) = integral of log(1 + eta/|cos pi x|) against the sqrt(eta) bound.

    The ladder is eta = 1e-1..1e-6 (plus the given eta, if any).  The sqrt
    normalization I/sqrt(eta) decays like sqrt(eta)log(1/eta), so its ladder
    values are reported alongside the eta*log(1/eta) normalization, which is
    the one that stabilizes.  Separately checks the exact arc measure
    mes[|cos pi x| < eps] = (2/pi) asin(eps) < eps.
    """
    etas = [10.0 ** (-j) for j in range(1, 7)]
    if eta is not None:
        if not 0.0 < eta < 1.0:
            raise ValueError("singular_integral_check: eta must lie in (0,1)")
        if eta not in etas:
            etas.append(float(eta))
    etas.sort(reverse=True)

    integrals, errors = [], []
    for e in etas:
        val, err = scipy.integrate.quad(
            lambda t: math.log1p(e / abs(math.cos(math.pi * t))), 0.0, 1.0,
            points=[0.5], limit=400,
        )
        integrals.append(val)
        errors.append(err)
    sqrt_ratios = [v / math.sqrt(e) for v, e in zip(integrals, etas)]
    etalog_ratios = [v / (e * math.log(1.0 / e)) for v, e in zip(integrals, etas)]
    fitted_c = max(sqrt_ratios)
    stable = all(abs(r / fitted_c - 1.0) <= 0.2 for r in sqrt_ratios)

    eps_grid = [0.05, 0.1, 0.2, 0.5, 0.9]
    measures = [2.0 / math.pi * math.asin(e) for e in eps_grid]
    leb_ok = all(m < e for m, e in zip(measures, eps_grid))
    return SingularIntegralReport(
        etas=tuple(etas), integrals=tuple(integrals),
        sqrt_ratios=tuple(sqrt_ratios), etalog_ratios=tuple(etalog_ratios),
        fitted_c=fitted_c, sqrt_stable=stable,
        quad_errors=tuple(errors),
        lebesgue_epsilons=tuple(eps_grid), lebesgue_measures=tuple(measures),
        lebesgue_ok=leb_ok,
    )
