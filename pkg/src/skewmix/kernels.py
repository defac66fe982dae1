"""Kernel dispatch: the compiled extension when importable, else numpy.

Set ``SKEWMIX_PURE_PYTHON=1`` to force the fallback. ``SKEWMIX_THREADS``
sets the default worker count of the compiled gather loop; results do not
depend on it because every output row is reduced in a fixed order.
"""

import os

import numpy as np

from . import _fallback

_native = None
if not os.environ.get("SKEWMIX_PURE_PYTHON"):
    try:
        from . import _native
    except ImportError:
        _native = None

BACKEND = "native" if _native is not None else "python"


def default_threads():
    try:
        return max(1, int(os.environ.get("SKEWMIX_THREADS", "1")))
    except ValueError:
        return 1


def _impl(backend):
    backend = backend or BACKEND
    if backend == "native":
        if _native is None:
            raise RuntimeError("compiled extension skewmix._native is not available")
        return _native
    return _fallback


def gather_apply(idx, w, h, threads=None, backend=None):
    """Apply a padded sparse collocation operator to one or more columns."""
    vector = h.ndim == 1
    h2 = np.ascontiguousarray(h.reshape(h.shape[0], -1), dtype=np.complex128)
    out = _impl(backend).gather_apply(
        np.ascontiguousarray(idx, dtype=np.int64),
        np.ascontiguousarray(w, dtype=np.complex128),
        h2,
        threads or default_threads(),
    )
    out = np.asarray(out)
    return out[:, 0] if vector else out


def overlap_mass(lo, hi, weight, backend=None):
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    weight = np.ascontiguousarray(weight, dtype=np.float64)
    if lo.size == 0:
        return np.zeros(0)
    return np.asarray(_impl(backend).overlap_mass(lo, hi, weight))
