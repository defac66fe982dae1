"""Slope cones of iterated preimages, transversality and the overlap mass phi."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import DEFAULT_CAP, PreimageTree, preimage_tree
from .errors import InvariantViolation, NonPositiveDensity
from .grid import GridFunction

DEFAULT_Y_SAMPLES = 64


@dataclass(frozen=True)
class ConeInterval:
    """Closed slope interval ``[center - halfwidth, center + halfwidth]``."""

    center: float
    halfwidth: float

    @property
    def lo(self):
        return self.center - self.halfwidth

    @property
    def hi(self):
        return self.center + self.halfwidth

    def contains(self, slope):
        return self.lo <= slope <= self.hi


def cone_image(node, C1: float) -> ConeInterval:
    """Image of the base cone ``{|slope| <= C1}`` under ``DF^n`` at ``node``."""
    return ConeInterval(node.dtau_n * node.J_n, C1 * node.J_n)


def transversal(a: ConeInterval, b: ConeInterval) -> bool:
    """True iff the closed slope intervals are disjoint."""
    return a.hi < b.lo or b.hi < a.lo


def cone_bounds(tree: PreimageTree, C1: float):
    """Arrays ``(lo, hi)`` of the cones of every node in ``tree``."""
    c = tree.dtau * tree.J
    w = C1 * tree.J
    return c - w, c + w


def sample_points(sp, y_samples: int = DEFAULT_Y_SAMPLES):
    """Uniform midpoints of the circle together with all lap-image endpoints."""
    if y_samples < 1:
        raise ValueError("y_samples must be >= 1")
    base = (np.arange(y_samples) + 0.5) / y_samples
    ends = [lap.c0 for lap in sp.laps] + [lap.c1 for lap in sp.laps]
    return np.unique(np.concatenate([base, np.mod(ends, 1.0)]))


def overlap_masses(tree: PreimageTree, C1: float) -> np.ndarray:
    """For every node, the ``J_n`` mass of same-root nodes whose cone meets its cone.

    The self pair is included.
    """
    lo, hi = cone_bounds(tree, C1)
    out = np.empty_like(lo)
    for k in range(tree.roots.size):
        s = tree.slice(k)
        out[s] = kernels.overlap_mass(lo[s], hi[s], tree.J[s])
    return out


def phi_at(sp, n: int, ys, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Per-root value of ``max_{x1} sum_{x2 not transversal to x1} J_n(x2)``."""
    tree = preimage_tree(sp, ys, n, cap)
    mass = overlap_masses(tree, sp.C1)
    return np.array([mass[tree.slice(k)].max() for k in range(tree.roots.size)])


def phi(sp, n: int, y_samples: int = DEFAULT_Y_SAMPLES, cap: int = DEFAULT_CAP) -> float:
    """Grid sup over ``y`` of the non-transversal preimage mass at depth ``n``.

    The sup is taken over ``y_samples`` uniform midpoints plus all lap-image
    endpoints.

    Raises
    ------
    CapExceeded
        If ``n`` exceeds ``cap``.
    """
    return float(phi_at(sp, n, sample_points(sp, y_samples), cap).max())


def _density_values(h_nu, x):
    v = np.asarray(h_nu(x), dtype=float)
    if np.any(v <= 0):
        raise NonPositiveDensity("density must be strictly positive")
    return v


def _check_density(h_nu):
    if isinstance(h_nu, GridFunction) and np.min(h_nu.values.real) <= 0:
        raise NonPositiveDensity("density must be strictly positive")


def phi_tilde(sp, n: int, L_slope: float, y: float, h_nu=None, cap: int = DEFAULT_CAP) -> float:
    """Weighted mass ``sum J_n(x) h(x)/h(y)`` over ``x`` whose cone contains ``L_slope``.

    ``h_nu`` is a :class:`GridFunction` or a callable; ``None`` means ``1``.

    Raises
    ------
    NonPositiveDensity
        If the density is not strictly positive.
    """
    if h_nu is not None:
        _check_density(h_nu)
    tree = preimage_tree(sp, [y], n, cap)
    lo, hi = cone_bounds(tree, sp.C1)
    w = tree.J if h_nu is None else tree.J * _density_values(h_nu, tree.x) / _density_values(h_nu, tree.roots)[0]
    m = (lo <= L_slope) & (L_slope <= hi)
    return float(np.sum(w[m]))


def _sup_over_slopes(lo, hi, w):
    """Exact ``sup_L sum_{lo_i <= L <= hi_i} w_i``, attained at a left endpoint."""
    olo = np.argsort(lo, kind="stable")
    ohi = np.argsort(hi, kind="stable")
    clo = np.concatenate([[0.0], np.cumsum(w[olo])])
    chi = np.concatenate([[0.0], np.cumsum(w[ohi])])
    cand = np.concatenate([lo, 0.5 * (lo + hi)])
    inside = clo[np.searchsorted(lo[olo], cand, side="right")] - chi[np.searchsorted(hi[ohi], cand, side="left")]
    return float(inside.max())


def phi_tilde_sup(sp, n: int, ys, h_nu=None, cap: int = DEFAULT_CAP) -> float:
    """Sup of :func:`phi_tilde` over all slopes and the roots ``ys``.

    Candidate slopes are every cone's left endpoint (where the sup is
    attained) and every cone center.
    """
    if h_nu is not None:
        _check_density(h_nu)
    tree = preimage_tree(sp, ys, n, cap)
    lo, hi = cone_bounds(tree, sp.C1)
    w = tree.J.copy()
    if h_nu is not None:
        w *= _density_values(h_nu, tree.x) / _density_values(h_nu, tree.roots)[tree.owner]
    best = 0.0
    for k in range(tree.roots.size):
        s = tree.slice(k)
        best = max(best, _sup_over_slopes(lo[s], hi[s], w[s]))
    return best


def separation_violations(tree: PreimageTree, C1: float, chunk: int = 2048) -> int:
    """Count transversal pairs violating ``|c1 - c2| > C1 (J1 + J2)``.

    Pairs are formed among nodes sharing a root. Every transversal pair is
    checked against the inequality as written, independently of the
    interval-disjointness test used to flag it.
    """
    lo, hi = cone_bounds(tree, C1)
    c = tree.dtau * tree.J
    bad = 0
    for k in range(tree.roots.size):
        s = tree.slice(k)
        L, H, C, J = lo[s], hi[s], c[s], tree.J[s]
        for a in range(0, L.size, chunk):
            b = slice(a, a + chunk)
            tr = (H[b, None] < L[None, :]) | (H[None, :] < L[b, None])
            ok = np.abs(C[b, None] - C[None, :]) > C1 * (J[b, None] + J[None, :])
            bad += int(np.count_nonzero(tr & ~ok))
    return bad


def assert_separation(tree: PreimageTree, C1: float):
    """Raise :class:`InvariantViolation` if any transversal pair fails separation."""
    v = separation_violations(tree, C1)
    if v:
        raise InvariantViolation(f"{v} transversal pairs violate the separation inequality")


def phi_brute(tree: PreimageTree, C1: float, k: int = 0) -> float:
    """Quadratic reference for :func:`phi_at` on root ``k``."""
    nodes = tree.nodes(k)
    cones = [cone_image(nd, C1) for nd in nodes]
    best = 0.0
    for a in cones:
        best = max(best, sum(nd.J_n for nd, b in zip(nodes, cones) if not transversal(a, b)))
    return best


def fit_phi_decay(sp, n_values=range(2, 9), y_samples: int = DEFAULT_Y_SAMPLES, cap: int = DEFAULT_CAP):
    """Fit ``phi(n) <= C_gamma exp(-n gamma)`` over ``n_values``.

    ``gamma`` is the least-squares slope of ``-log phi(n)`` (clipped at 0)
    and ``C_gamma`` the smallest constant making the bound hold on the
    sampled ``n``. Returns ``(gamma, C_gamma, phis)``.
    """
    ns = np.asarray(list(n_values), dtype=float)
    phis = np.array([phi(sp, int(n), y_samples, cap) for n in ns])
    slope = np.polyfit(ns, np.log(phis), 1)[0] if ns.size > 1 else 0.0
    gamma = max(0.0, -float(slope))
    C_gamma = float(np.max(phis * np.exp(ns * gamma)))
    return gamma, C_gamma, phis
