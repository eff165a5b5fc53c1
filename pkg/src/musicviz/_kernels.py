"""Hot numeric kernels: numba-compiled loops with a pure-numpy fallback.

The numpy path is selected automatically when numba cannot be imported, or
explicitly by setting ``MUSICVIZ_NO_NUMBA=1`` in the environment. ``BACKEND``
names the active path; ``musicviz bench`` times both implementations.
"""

import os

import numpy as np

__all__ = ["BACKEND", "nsdf", "nsdf_numba", "nsdf_numpy"]


def _numba_disabled() -> bool:
    flag = os.environ.get("MUSICVIZ_NO_NUMBA", "").strip().lower()
    return flag in ("1", "true", "yes", "on")


def nsdf_numpy(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Normalized self-similarity for lags 0..max_lag via FFT autocorrelation.

    n(tau) = 2*sum_i x[i]*x[i+tau] / sum_i (x[i]^2 + x[i+tau]^2), summing over
    i = 0..N-1-tau. An all-zero input yields all zeros; otherwise n(0) == 1
    exactly (set explicitly, the definition makes it an identity).
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    size = 1
    while size < 2 * n:
        size *= 2
    spec = np.fft.rfft(x, size)
    autocorr = np.fft.irfft(spec.real**2 + spec.imag**2, size)[: max_lag + 1]
    prefix = np.concatenate(([0.0], np.cumsum(x * x)))
    lags = np.arange(max_lag + 1)
    norm = prefix[n - lags] + (prefix[n] - prefix[lags])
    out = np.zeros(max_lag + 1)
    np.divide(2.0 * autocorr, norm, out=out, where=norm > 0.0)
    np.clip(out, -1.0, 1.0, out=out)
    if norm[0] > 0.0:
        out[0] = 1.0
    return out


if _numba_disabled():
    njit = None
else:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised via the env flag path
        njit = None

if njit is not None:

    @njit(cache=True)
    def _nsdf_jit(x, max_lag):
        n = x.shape[0]
        prefix = np.empty(n + 1)
        prefix[0] = 0.0
        for i in range(n):
            prefix[i + 1] = prefix[i] + x[i] * x[i]
        out = np.empty(max_lag + 1)
        for tau in range(max_lag + 1):
            norm = prefix[n - tau] + (prefix[n] - prefix[tau])
            if norm <= 0.0:
                out[tau] = 0.0
            else:
                val = 2.0 * np.dot(x[: n - tau], x[tau:]) / norm
                if val > 1.0:
                    val = 1.0
                elif val < -1.0:
                    val = -1.0
                out[tau] = val
        if prefix[n] > 0.0:
            out[0] = 1.0
        return out

    def nsdf_numba(x: np.ndarray, max_lag: int) -> np.ndarray:
        """Numba implementation of :func:`nsdf_numpy` (loop over BLAS dots)."""
        return _nsdf_jit(np.ascontiguousarray(x, dtype=np.float64), int(max_lag))

    nsdf = nsdf_numba
    BACKEND = "numba"
else:
    nsdf_numba = None
    nsdf = nsdf_numpy
    BACKEND = "numpy"
