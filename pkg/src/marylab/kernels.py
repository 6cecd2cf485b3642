"""Backend selection for the hot batch kernel.

The compiled extension is used when importable; set MARYLAB_PURE_PYTHON=1
to force the NumPy/SciPy fallback.  Values are identical between backends
up to LAPACK rounding, and independent of the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_impl = None
if not os.environ.get("MARYLAB_PURE_PYTHON"):
    try:
        from . import _ext as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = None
if _impl is None:
    from . import _kernels_py as _impl  # type: ignore[no-redef]
    BACKEND = "python"

_CHUNK = 2048  # fixed split so results never depend on the worker count

#: the compiled kernel releases the GIL; the pure path does not, and threading
#: it only adds contention, so extra workers are used for the compiled path only
_THREADED = BACKEND == "compiled"


def batch_logabsdet(xs, n_sites, omega, taps, threads: int = 1) -> np.ndarray:
    """log|det B(x)| over the window [0, n_sites) for every x in xs."""
    xs = np.ascontiguousarray(xs, dtype=float)
    taps = np.ascontiguousarray(taps, dtype=float)
    if not _THREADED:
        threads = 1
    if threads <= 1 or len(xs) <= _CHUNK:
        return np.asarray(_impl.batch_logabsdet(xs, int(n_sites), float(omega), taps))
    chunks = [xs[i:i + _CHUNK] for i in range(0, len(xs), _CHUNK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda c: np.asarray(_impl.batch_logabsdet(c, int(n_sites), float(omega), taps)),
            chunks,
        ))
    return np.concatenate(parts)
