"""Vectorised bracketed Newton iteration for increasing functions."""

import numpy as np

from .errors import NoConvergence

MAX_ITER = 100
TOL = 1e-13


def solve_increasing(fun, targets, lo, hi, tol=TOL, max_iter=MAX_ITER):
    """Solve ``fun(x) = targets`` on ``[lo, hi]`` for an increasing ``fun``.

    ``fun(x)`` returns ``(value, derivative)`` arrays. Newton steps that leave
    the current bracket are replaced by bisection. Targets outside
    ``[fun(lo), fun(hi)]`` are clamped to the nearest end.

    Raises
    ------
    NoConvergence
        If some residual still exceeds ``tol`` after ``max_iter`` steps while
        its bracket has not collapsed to adjacent floats.
    """
    t = np.atleast_1d(np.asarray(targets, dtype=float))
    a = np.broadcast_to(np.asarray(lo, dtype=float), t.shape).copy()
    b = np.broadcast_to(np.asarray(hi, dtype=float), t.shape).copy()
    if t.size == 0:
        return t.copy()
    fa, _ = fun(a)
    fb, _ = fun(b)
    t = np.clip(t, fa, fb)
    span = np.where(fb > fa, fb - fa, 1.0)
    x = a + (b - a) * (t - fa) / span
    best = x.copy()
    best_r = np.full(t.shape, np.inf)
    active = np.ones(t.shape, dtype=bool)
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xi = x[idx]
        v, d = fun(xi)
        r = v - t[idx]
        ar = np.abs(r)
        better = ar < best_r[idx]
        best[idx[better]] = xi[better]
        best_r[idx[better]] = ar[better]
        low = r < 0
        a[idx[low]] = xi[low]
        b[idx[~low]] = xi[~low]
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xi - r / d
        bad = ~np.isfinite(xn) | (xn <= a[idx]) | (xn >= b[idx]) | (d <= 0)
        xn[bad] = 0.5 * (a[idx][bad] + b[idx][bad])
        x[idx] = xn
        collapsed = (b[idx] - a[idx]) <= 4 * np.spacing(np.maximum(np.abs(a[idx]), np.abs(b[idx])))
        done = (ar <= 0.25 * tol) | collapsed | (xn == xi)
        active[idx[done]] = False
    v, _ = fun(best)
    res = np.abs(v - t)
    if np.any(res > tol):
        worst = float(res.max())
        raise NoConvergence(f"branch inverse residual {worst:.3e} exceeds {tol:.0e}")
    return best
