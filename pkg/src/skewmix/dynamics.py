"""Preimage trees of the base map and the cocycle data carried along them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, InvariantViolation
from .jet import eval_jet2
from .mapspec import SkewProduct
from .roots import solve_increasing

DEFAULT_CAP = 14
BOUND_RTOL = 1e-9


@dataclass(frozen=True)
class BranchWord:
    """Itinerary of a preimage: ``symbols[j]`` is the lap containing ``f^j(x)``."""

    symbols: tuple

    @property
    def n(self):
        return len(self.symbols)

    def __str__(self):
        return ".".join(str(s) for s in self.symbols)


@dataclass(frozen=True)
class PreimageNode:
    x: float
    word: BranchWord
    J_n: float
    tau_n: float
    dtau_n: float
    near_boundary: bool = False


@dataclass(frozen=True, eq=False)
class PreimageTree:
    """Flat arrays describing ``f^{-n}(y)`` for one or more roots ``y``.

    Nodes are ordered by root (``owner``) and then lexicographically by word.
    """

    n: int
    roots: np.ndarray
    owner: np.ndarray
    words: np.ndarray
    x: np.ndarray
    J: np.ndarray
    tau: np.ndarray
    dtau: np.ndarray
    near_boundary: np.ndarray

    def __len__(self):
        return self.x.size

    def slice(self, k):
        """Index range of the nodes belonging to root ``k``."""
        lo = np.searchsorted(self.owner, k, side="left")
        hi = np.searchsorted(self.owner, k, side="right")
        return slice(lo, hi)

    def nodes(self, k=0):
        s = self.slice(k)
        return [
            PreimageNode(
                float(self.x[i]),
                BranchWord(tuple(int(v) for v in self.words[i])),
                float(self.J[i]),
                float(self.tau[i]),
                float(self.dtau[i]),
                bool(self.near_boundary[i]),
            )
            for i in range(s.start, s.stop)
        ]


def _lap_fun(sp, lap):
    expr = sp.f.branches[lap.branch]

    def fun(x):
        j = eval_jet2(expr, x)
        return j.value, j.d1

    return fun


def lap_inverse(sp: SkewProduct, lap_index: int, ys):
    """Preimages in lap ``lap_index`` of circle points assumed in its image.

    Returns unwrapped branch coordinates; reduce mod 1 for circle points.
    """
    lap = sp.laps[lap_index]
    t = lap.target(ys)
    return solve_increasing(_lap_fun(sp, lap), t, lap.lo, lap.hi)


def branch_inverse(sp: SkewProduct, branch: int, y: float):
    """The unique ``x`` in lap ``branch`` with ``f(x) = y``, or ``None``.

    Raises
    ------
    NoConvergence
        If the root solver fails (a malformed branch).
    """
    lap = sp.laps[branch]
    if not bool(lap.contains(np.array([y]))[0]):
        return None
    return float(np.mod(lap_inverse(sp, branch, np.array([y]))[0], 1.0))


def pull_back(sp: SkewProduct, points):
    """One level of inverse branches for every point.

    Returns ``(parent, lap, x_unwrapped, fjet)`` with one entry per
    (point, lap) pair for which the lap image contains the point; ``fjet``
    holds ``f, f', f''`` at the preimage.
    """
    points = np.asarray(points, dtype=float)
    parents, laps, xs, d1s, d2s, vals = [], [], [], [], [], []
    for lap in sp.laps:
        m = np.nonzero(lap.contains(points))[0]
        if m.size == 0:
            continue
        x = solve_increasing(_lap_fun(sp, lap), lap.target(points[m]), lap.lo, lap.hi)
        j = eval_jet2(sp.f.branches[lap.branch], x)
        parents.append(m)
        laps.append(np.full(m.size, lap.index))
        xs.append(x)
        vals.append(np.asarray(j.value))
        d1s.append(np.asarray(j.d1))
        d2s.append(np.asarray(j.d2))
    if not parents:
        e = np.zeros(0)
        return e.astype(np.int64), e.astype(np.int64), e, (e, e, e)
    return (
        np.concatenate(parents),
        np.concatenate(laps),
        np.concatenate(xs),
        (np.concatenate(vals), np.concatenate(d1s), np.concatenate(d2s)),
    )


def preimage_tree(sp: SkewProduct, ys, n: int, cap: int = DEFAULT_CAP, check_bound: bool = True) -> PreimageTree:
    """Enumerate ``f^{-n}(y)`` for every root in ``ys`` with ``J_n, tau_n, tau_n'``.

    ``tau_n`` is accumulated with compensated summation. When
    ``check_bound`` is set, ``|J_n tau_n'| <= C1/2`` is asserted at every
    depth.

    Raises
    ------
    CapExceeded
        If ``n`` exceeds ``cap``.
    InvariantViolation
        If the cocycle bound fails on some node.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise CapExceeded(f"n = {n} exceeds the enumeration cap {cap}")
    roots = np.atleast_1d(np.mod(np.asarray(ys, dtype=float), 1.0))
    owner = np.arange(roots.size)
    p = roots.copy()
    J = np.ones(roots.size)
    s = np.zeros(roots.size)
    comp = np.zeros(roots.size)
    dtau = np.zeros(roots.size)
    flag = np.zeros(roots.size, dtype=bool)
    cols = []
    bound = 0.5 * sp.C1 * (1.0 + BOUND_RTOL) + 1e-300
    for _ in range(n):
        for lap in sp.laps:
            flag |= lap.near_boundary(p)
        parent, lap_ids, xu, (_, d1, _) = pull_back(sp, p)
        x = np.mod(xu, 1.0)
        tj = sp.tau.jet(x)
        J = J[parent] / d1
        dtau = tj.d1 + d1 * dtau[parent]
        # Neumaier compensated accumulation of tau_n
        prev, v = s[parent], tj.value
        t = prev + v
        comp = comp[parent] + np.where(np.abs(prev) >= np.abs(v), (prev - t) + v, (v - t) + prev)
        s = t
        owner = owner[parent]
        flag = flag[parent]
        cols = [c[parent] for c in cols]
        cols.insert(0, lap_ids)
        p = x
        if check_bound and np.any(np.abs(J * dtau) > bound):
            worst = float(np.max(np.abs(J * dtau)))
            raise InvariantViolation(f"|J_n tau_n'| = {worst:.17g} exceeds C1/2 = {0.5 * sp.C1:.17g}")
    words = np.stack(cols, axis=1) if cols else np.zeros((p.size, 0), dtype=np.int64)
    order = np.lexsort(tuple(words[:, k] for k in range(words.shape[1] - 1, -1, -1)) + (owner,))
    return PreimageTree(
        n=n,
        roots=roots,
        owner=owner[order],
        words=words[order],
        x=p[order],
        J=J[order],
        tau=(s + comp)[order],
        dtau=dtau[order],
        near_boundary=flag[order],
    )


def preimages(sp: SkewProduct, y: float, n: int, cap: int = DEFAULT_CAP) -> list:
    """All solutions of ``f^n(x) = y`` as :class:`PreimageNode` in word order."""
    return preimage_tree(sp, [y], n, cap).nodes(0)


def orbit(sp: SkewProduct, x: float, u: float, n: int) -> list:
    """Forward orbit ``(F^k(x, u))_{k=0..n}`` with the fibre reduced mod 1."""
    out = [(float(np.mod(x, 1.0)), float(np.mod(u, 1.0)))]
    for _ in range(n):
        x, u = out[-1]
        out.append((float(sp.f(x)), float(np.mod(u + sp.tau(x), 1.0))))
    return out
