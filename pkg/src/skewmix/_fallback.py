"""Pure-numpy kernels, numerically equivalent to the compiled ``_native``."""

import numpy as np


def gather_apply(idx, w, h, threads=1):
    """out[i, p] = sum_k w[i, k] * h[idx[i, k], p]."""
    out = np.zeros((idx.shape[0], h.shape[1]), dtype=np.complex128)
    for k in range(idx.shape[1]):
        out += w[:, k, None] * h[idx[:, k]]
    return out


def overlap_mass(lo, hi, weight):
    """mass[i] = sum of weight[j] over closed intervals j meeting interval i.

    Intervals meet iff ``lo_j <= hi_i`` and ``hi_j >= lo_i``; those with
    ``hi_j < lo_i`` are a subset of those with ``lo_j <= hi_i``.
    """
    olo = np.argsort(lo, kind="stable")
    ohi = np.argsort(hi, kind="stable")
    clo = np.concatenate([[0.0], np.cumsum(weight[olo])])
    chi = np.concatenate([[0.0], np.cumsum(weight[ohi])])
    a = np.searchsorted(lo[olo], hi, side="right")
    b = np.searchsorted(hi[ohi], lo, side="left")
    return clo[a] - chi[b]
