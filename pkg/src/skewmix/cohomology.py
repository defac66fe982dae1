"""Invariant slope field, transfer function and the cohomology verdict.

For an expanding base map the series ``l(y) = sum_k tau'(g^k y) / (f^k)'(g^k y)``
along a fixed choice of inverse branch ``g`` gives a candidate invariant
slope. Its primitive ``theta`` yields ``chi = tau - theta o f + theta``; ``tau``
is cohomologous to a piecewise constant exactly when ``chi`` is constant on
every smoothness piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import lap_inverse
from .grid import GridFunction

DEFAULT_TOL = 1e-10
DEFAULT_GRID = 2**14
JUMP_FACTOR = 100.0
JUMP_WINDOW = 9

COHOMOLOGOUS = "Cohomologous"
NOT_COHOMOLOGOUS = "NotCohomologous"


def truncation_order(sp, tol: float) -> int:
    """Smallest ``M`` whose series tail is below ``tol``."""
    if sp.sup_dtau == 0.0:
        return 0
    lam = sp.lambda_tilde
    return max(1, math.ceil(math.log(sp.sup_dtau / ((lam - 1.0) * tol)) / math.log(lam)))


def select_inverse(sp, y):
    """The preimage of each ``y`` through the lowest-indexed lap containing it."""
    y = np.mod(np.asarray(y, dtype=float), 1.0)
    x = np.full(y.shape, np.nan)
    todo = np.ones(y.shape, dtype=bool)
    for lap in sp.laps:
        m = todo & lap.contains(y)
        if np.any(m):
            x[m] = np.mod(lap_inverse(sp, lap.index, y[m]), 1.0)
            todo &= ~m
        if not todo.any():
            break
    return x


def slope_at(sp, y, M: int = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Partial sum ``l_M(y)`` of the invariant slope series at arbitrary points."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if M is None:
        M = truncation_order(sp, tol)
    acc = np.zeros(y.shape)
    w = np.ones(y.shape)
    x = y
    for _ in range(M):
        x = select_inverse(sp, x)
        w = w / sp.f.jet(x).d1
        acc += sp.tau.jet(x).d1 * w
    return acc


def invariant_slope(sp, grid_N: int = DEFAULT_GRID, tol: float = DEFAULT_TOL) -> GridFunction:
    """The slope series sampled at the midpoints of an ``grid_N``-cell grid.

    The truncation order makes the neglected tail smaller than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    return GridFunction(slope_at(sp, GridFunction.midpoints(grid_N), tol=tol))


@dataclass(frozen=True, eq=False)
class Primitive(GridFunction):
    """Cumulative integral of a grid function, with ``theta(0) = 0``.

    ``values`` hold midpoint samples, ``nodes`` the values at ``i/N``.
    Evaluation interpolates the nodes linearly and continues to the real
    line by ``theta(y + 1) = theta(y) + theta(1)``, so lifted map values can
    be fed in directly.
    """

    nodes: np.ndarray = field(default=None)

    @property
    def period_shift(self):
        return float(self.nodes[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        t = (x - k) * self.N
        i = np.minimum(t.astype(np.int64), self.N - 1)
        frac = t - i
        return self.nodes[i] * (1.0 - frac) + self.nodes[i + 1] * frac + k * self.period_shift

    def lipschitz(self):
        return float(np.max(np.abs(np.diff(self.nodes))) * self.N)


def primitive_theta(ell: GridFunction) -> Primitive:
    """Midpoint-rule primitive of ``ell`` normalized by ``theta(0) = 0``."""
    v = np.asarray(ell.values).real
    N = v.size
    nodes = np.concatenate([[0.0], np.cumsum(v) / N])
    return Primitive(nodes[:-1] + 0.5 * v / N, nodes)


def pieces(sp):
    """Smoothness pieces between consecutive merged breakpoints (unwrapped)."""
    bp = np.asarray(sp.merged_breakpoints, dtype=float)
    ends = np.append(bp[1:], bp[0] + 1.0)
    return [(float(a), float(b)) for a, b in zip(bp, ends)]


def piece_index(sp, x):
    bp = np.asarray(sp.merged_breakpoints, dtype=float)
    idx = np.searchsorted(bp, np.mod(x, 1.0), side="right") - 1
    return np.where(idx < 0, bp.size - 1, idx)


@dataclass(frozen=True, eq=False)
class CohomologyReport:
    ell: GridFunction
    theta: Primitive
    chi: GridFunction
    verdict: str
    deviation: float
    pieces: list
    tol_chi: float
    piece_values: np.ndarray

    @property
    def cohomologous(self):
        return self.verdict == COHOMOLOGOUS

    def summary(self):
        return {
            "verdict": self.verdict,
            "deviation": self.deviation,
            "tol_chi": self.tol_chi,
            "pieces": [list(p) for p in self.pieces],
            "chi_piece_means": [float(v) for v in self.piece_values],
        }


def default_tol_chi(sp):
    return 1e-6 * (1.0 + sp.sup_tau)


def extract_chi(sp, theta: Primitive, ell: GridFunction = None, tol_chi: float = None) -> CohomologyReport:
    """Sample ``chi = tau - theta o f + theta`` and decide the verdict.

    The deviation is the largest spread ``max chi - min chi`` over a single
    smoothness piece; the verdict is cohomologous iff it is at most
    ``tol_chi`` (default ``1e-6 (1 + sup |tau|)``).
    """
    if tol_chi is None:
        tol_chi = default_tol_chi(sp)
    x = GridFunction.midpoints(theta.N)
    fx = sp.f.jet(x).value
    chi = sp.tau.jet(x).value - theta(fx) + theta(x)
    pid = piece_index(sp, x)
    ps = pieces(sp)
    dev = 0.0
    means = np.zeros(len(ps))
    for k in range(len(ps)):
        v = chi[pid == k]
        if v.size:
            dev = max(dev, float(v.max() - v.min()))
            means[k] = float(v.mean())
    verdict = COHOMOLOGOUS if dev <= tol_chi else NOT_COHOMOLOGOUS
    if ell is None:
        ell = GridFunction(np.zeros(theta.N))
    return CohomologyReport(ell, theta, GridFunction(chi), verdict, dev, ps, tol_chi, means)


def analyze(sp, grid_N: int = DEFAULT_GRID, tol: float = DEFAULT_TOL, tol_chi: float = None) -> CohomologyReport:
    """Slope series, primitive and verdict in one pass."""
    ell = invariant_slope(sp, grid_N, tol)
    return extract_chi(sp, primitive_theta(ell), ell, tol_chi)


def detect_jumps(values) -> np.ndarray:
    """Cells ``i`` where ``|v[i+1] - v[i]|`` exceeds 100x the local median step."""
    v = np.asarray(values)
    d = np.abs(np.roll(v, -1) - v)
    half = JUMP_WINDOW // 2
    windows = np.stack([np.roll(d, s) for s in range(-half, half + 1)])
    med = np.median(windows, axis=0)
    floor = 1e-14 * max(1.0, float(np.max(np.abs(v))))
    return np.nonzero(d > JUMP_FACTOR * np.maximum(med, floor))[0]


def invariance_residual(sp, ell: GridFunction, tol: float = DEFAULT_TOL):
    """Sup of ``|tau' + l - f' l o f|`` on the grid, away from discontinuities.

    Both slope values are evaluated from the series itself. The identity
    only holds where the selected inverse of ``f(x)`` is ``x`` itself, so
    other cells are excluded, as are cells within ``2/N`` of a merged
    breakpoint, of a detected jump of ``l``, or whose image lies that close
    to a jump. Returns ``(residual, mask)``.
    """
    N = ell.N
    x = GridFunction.midpoints(N)
    jf = sp.f.jet(x)
    fx = np.mod(jf.value, 1.0)
    r = np.abs(sp.tau.jet(x).d1 + slope_at(sp, x, tol=tol) - jf.d1 * slope_at(sp, fx, tol=tol))
    bad = np.concatenate([np.asarray(sp.merged_breakpoints, dtype=float), (detect_jumps(ell.values) + 1.0) / N])
    if bad.size:
        d = np.abs(np.mod(x[:, None] - bad[None, :] + 0.5, 1.0) - 0.5).min(axis=1)
        dfx = np.abs(np.mod(fx[:, None] - bad[None, :] + 0.5, 1.0) - 0.5).min(axis=1)
        keep = (d > 2.0 / N) & (dfx > 2.0 / N)
    else:
        keep = np.ones(N, dtype=bool)
    back = select_inverse(sp, fx)
    keep &= np.abs(np.mod(back - x + 0.5, 1.0) - 0.5) < 1e-9
    return (float(r[keep].max()) if keep.any() else 0.0), keep
