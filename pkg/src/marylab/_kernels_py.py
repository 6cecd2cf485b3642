"""Pure NumPy/SciPy implementation of the batched window log-determinant.

Mirrors the compiled extension: same banded/dense selection rule, same
LAPACK routines underneath, so the two backends agree to rounding.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

_DENSE_CHUNK = 4_000_000  # entries per slogdet chunk


def _phases(xs, n_sites, omega):
    th = xs[:, None] + np.arange(n_sites)[None, :] * omega
    th -= np.round(th)
    return np.sin(np.pi * th), np.cos(np.pi * th)


def batch_logabsdet(xs, n_sites, omega, taps):
    """log|det B(x)| over [0, n_sites) for each x; -inf on an exact zero pivot."""
    xs = np.ascontiguousarray(xs, dtype=float)
    taps = np.asarray(taps, dtype=float)
    r = len(taps) - 1
    while r > 0 and taps[r] == 0.0:
        r -= 1
    n = int(n_sites)
    out = np.empty(len(xs))

    if r == 0:
        s, c = _phases(xs, n, omega)
        with np.errstate(divide="ignore"):
            out[:] = np.sum(np.log(np.abs(s + c * taps[0])), axis=1)
        return out

    if 6 * r * r < n * n:
        kl = ku = r
        ldab = 3 * r + 1
        offs = np.arange(-r, r + 1)
        chunk = max(1, _DENSE_CHUNK // (ldab * n))
        for lo in range(0, len(xs), chunk):
            part = xs[lo:lo + chunk]
            s, c = _phases(part, n, omega)
            stack = np.zeros((len(part), ldab, n))
            for d in offs:
                j0, j1 = max(0, -d), n - max(0, d)
                stack[:, kl + ku + d, j0:j1] = c[:, np.arange(j0, j1) + d] * taps[abs(d)]
            stack[:, kl + ku, :] += s
            for p in range(len(part)):
                lu, _, info = lapack.dgbtrf(stack[p], kl, ku)
                if info > 0:
                    out[lo + p] = -np.inf
                else:
                    with np.errstate(divide="ignore"):
                        out[lo + p] = np.sum(np.log(np.abs(lu[kl + ku, :])))
        return out

    chunk = max(1, _DENSE_CHUNK // (n * n))
    idx = np.arange(n)
    band = np.zeros((n, n))
    for d in range(-min(r, n - 1), min(r, n - 1) + 1):
        j = np.arange(max(0, -d), n - max(0, d))
        band[j + d, j] = taps[abs(d)]
    for lo in range(0, len(xs), chunk):
        part = xs[lo:lo + chunk]
        s, c = _phases(part, n, omega)
        stack = c[:, :, None] * band[None, :, :]
        stack[:, idx, idx] += s
        out[lo:lo + len(part)] = np.linalg.slogdet(stack)[1]
    return out
