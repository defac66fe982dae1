"""Partition refinement under the base map and boundary-mass estimates.

A :class:`PartitionState` tracks pieces ``w_j`` of an initial interval
together with their images ``f^n w_j``. Each image is a single interval of
length at most ``delta``; long images are cut into equal parts. Every
piece keeps the branch history needed to pull image points back to the
domain exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jet import eval_jet2
from .roots import solve_increasing

GROWTH_SLACK = 1.05


@dataclass(frozen=True, eq=False)
class PartitionState:
    """Pieces of ``Omega_n`` and their images.

    ``lo, hi`` are domain endpoints, ``img_lo, img_hi`` the image interval
    of ``f^n`` on the piece (real line, ``img_lo`` in ``[0, 1)``).
    ``branch, shift, offset`` have one column per step: image points ``z``
    at step ``k+1`` pull back to ``f_i^{-1}(z + offset) + shift`` at step ``k``.
    """

    n: int
    lo: np.ndarray
    hi: np.ndarray
    img_lo: np.ndarray
    img_hi: np.ndarray
    branch: np.ndarray
    shift: np.ndarray
    offset: np.ndarray
    chopped: np.ndarray
    lift: float = 0.0

    @property
    def size(self):
        return self.lo.size

    @property
    def measure(self):
        return float(np.sum(self.hi - self.lo))

    @property
    def image_lengths(self):
        return self.img_hi - self.img_lo


def initial_state(omega0) -> PartitionState:
    a, b = (float(v) for v in omega0)
    if not b > a:
        raise ValueError("Omega0 must be a non-empty interval (a, b) with a < b")
    k = math.floor(a)
    empty = np.zeros((1, 0), dtype=np.int64)
    return PartitionState(
        0,
        np.array([a]),
        np.array([b]),
        np.array([a - k]),
        np.array([b - k]),
        empty,
        empty.copy(),
        empty.astype(float),
        np.zeros(1, dtype=bool),
        float(k),
    )


def _branch_fun(sp, i):
    e = sp.f.branches[i]

    def fun(x):
        j = eval_jet2(e, x)
        return j.value, j.d1

    return fun


def pull_back_points(sp, state: PartitionState, piece, z):
    """Domain points of image points ``z`` of ``f^n`` on the given pieces."""
    z = np.asarray(z, dtype=float).copy()
    piece = np.asarray(piece)
    for k in range(state.n - 1, -1, -1):
        br = state.branch[piece, k]
        t = z + state.offset[piece, k]
        for i in np.unique(br):
            m = br == i
            lo, hi = sp.f.interval(int(i))
            z[m] = solve_increasing(_branch_fun(sp, int(i)), t[m], lo, hi)
        z += state.shift[piece, k]
    return z + state.lift


def _real_breakpoints(sp, lo, hi):
    bp = sp.f.breakpoints
    out = []
    for m in range(math.floor(lo) - 1, math.ceil(hi) + 1):
        out.extend(bp + m)
    out = np.array(sorted(out))
    return out[(out > lo) & (out < hi)]


def refine(sp, state: PartitionState) -> PartitionState:
    """Apply ``f`` once, split at breakpoints and chop images longer than ``delta``."""
    delta = sp.delta
    rows = []
    for j in range(state.size):
        p, q = state.img_lo[j], state.img_hi[j]
        cuts = np.concatenate([[p], _real_breakpoints(sp, p, q), [q]])
        for s, t in zip(cuts[:-1], cuts[1:]):
            if t <= s:
                continue
            idx, xu = sp.f.locate(0.5 * (s + t))
            i = int(idx)
            m = round(0.5 * (s + t) - float(xu))
            e = sp.f.branches[i]
            fs = float(eval_jet2(e, s - m).value)
            ft = float(eval_jet2(e, t - m).value)
            k = max(1, math.ceil((ft - fs) / delta - 1e-12))
            ends = np.linspace(fs, ft, k + 1)
            rows.append((j, i, m, ends, k > 1))
    parent, br, sh, off, chopped, ilo, ihi = [], [], [], [], [], [], []
    for j, i, m, ends, ch in rows:
        for a, b in zip(ends[:-1], ends[1:]):
            c = math.floor(a)
            parent.append(j)
            br.append(i)
            sh.append(m)
            off.append(c)
            chopped.append(ch)
            ilo.append(a - c)
            ihi.append(b - c)
    parent = np.array(parent, dtype=np.int64)
    new = PartitionState(
        state.n + 1,
        np.zeros(parent.size),
        np.zeros(parent.size),
        np.array(ilo),
        np.array(ihi),
        np.concatenate([state.branch[parent], np.array(br)[:, None]], axis=1),
        np.concatenate([state.shift[parent], np.array(sh)[:, None]], axis=1),
        np.concatenate([state.offset[parent], np.array(off, dtype=float)[:, None]], axis=1),
        np.array(chopped, dtype=bool),
        state.lift,
    )
    pieces = np.arange(parent.size)
    object.__setattr__(new, "lo", pull_back_points(sp, new, pieces, new.img_lo))
    object.__setattr__(new, "hi", pull_back_points(sp, new, pieces, new.img_hi))
    return new


def evolve(sp, omega0, n: int) -> PartitionState:
    state = initial_state(omega0)
    for _ in range(n):
        state = refine(sp, state)
    return state


def _eps_cover(E, eps):
    """Disjoint intervals covering ``{z : d(z, E) <= eps}`` on ``[-1, 2]``.

    ``E`` holds circle points in ``[0, 1)``; copies shifted by +-1 make the
    cover valid for lifted image intervals.
    """
    E = np.sort(np.concatenate([E - 1.0, E, E + 1.0]))
    gap = np.nonzero(np.diff(E) > 2.0 * eps)[0]
    starts = np.concatenate([[0], gap + 1])
    ends = np.concatenate([gap, [E.size - 1]])
    return E[starts] - eps, E[ends] + eps


def z_epsilon(sp, state: PartitionState, eps: float, own_endpoints_only: bool = False) -> float:
    """Measure of points of ``Omega_n`` whose ``f^n`` image is within ``eps`` of ``f^n(boundary)``.

    By default the distance is to every boundary-image point of the state;
    with ``own_endpoints_only`` each piece only sees its own two image
    endpoints.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p, q = state.img_lo, state.img_hi
    if own_endpoints_only:
        whole = 2.0 * eps >= q - p
        pieces = np.arange(state.size)
        a1, b1 = p, np.minimum(p + eps, q)
        a2, b2 = np.maximum(q - eps, p), q
        total = np.sum(np.where(whole, state.hi - state.lo, 0.0))
        part = ~whole
        if part.any():
            pp = pieces[part]
            pts = np.concatenate([a1[part], b1[part], a2[part], b2[part]])
            pid = np.concatenate([pp] * 4)
            x = pull_back_points(sp, state, pid, pts).reshape(4, -1)
            total += np.sum(np.abs(x[1] - x[0]) + np.abs(x[3] - x[2]))
        return float(total)
    U_lo, U_hi = _eps_cover(np.mod(np.concatenate([p, q]), 1.0), eps)
    k0 = np.searchsorted(U_hi, p, side="left")
    k1 = np.searchsorted(U_lo, q, side="right")
    count = np.maximum(k1 - k0, 0)
    pid = np.repeat(np.arange(state.size), count)
    if pid.size == 0:
        return 0.0
    k = np.arange(pid.size) - np.repeat(np.cumsum(count) - count, count) + k0[pid]
    a = np.maximum(p[pid], U_lo[k])
    b = np.minimum(q[pid], U_hi[k])
    keep = b > a
    pid, a, b = pid[keep], a[keep], b[keep]
    x = pull_back_points(sp, state, np.concatenate([pid, pid]), np.concatenate([a, b])).reshape(2, -1)
    return float(np.sum(np.abs(x[1] - x[0])))


def growth_rhs(sp, omega0, n: int, eps: float) -> float:
    """``(lambda/beta)^n Z_{eps/lambda^n}(Omega0) + eps C_beta |Omega0|`` with ``lambda = lambda~``."""
    lam, beta = sp.lambda_tilde, sp.beta
    a, b = omega0
    size = b - a
    C_beta = 4.0 * sp.Lambda * beta / (sp.delta * lam * (beta - 1.0))
    z0 = min(2.0 * eps / lam**n, size)
    return (lam / beta) ** n * z0 + eps * C_beta * size


def growth_bound_check(sp, omega0, n: int, eps: float, own_endpoints_only: bool = True, slack: float = GROWTH_SLACK):
    """Both sides of the boundary-mass growth bound and the pass flag.

    Returns ``(lhs, rhs, pass)``.
    """
    a, b = (float(v) for v in omega0)
    if b - a > sp.delta + 1e-15:
        raise ValueError("|Omega0| must not exceed delta")
    state = evolve(sp, (a, b), n)
    lhs = z_epsilon(sp, state, eps, own_endpoints_only)
    rhs = growth_rhs(sp, (a, b), n, eps)
    return lhs, rhs, bool(lhs <= slack * rhs)


def single_interval_chain_check(sp, omega0, n: int, eps: float):
    """Check ``Z_{eps/lambda^n}(Omega0) <= 2 eps`` for a single interval ``Omega0``.

    Returns ``(value, 2 eps, pass)``.
    """
    a, b = (float(v) for v in omega0)
    value = z_epsilon(sp, initial_state((a, b)), eps / sp.lambda_tilde**n, own_endpoints_only=True)
    return value, 2.0 * eps, bool(value <= 2.0 * eps * (1.0 + 1e-12))
