"""Oscillatory integrals, the integration-by-parts bound and phase differences."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainMismatch, PanelCapExceeded
from .expr import Expr, parse_expression, to_source
from .jet import Jet2, eval_jet2
from .roots import solve_increasing

SUP_GRID = 10_000
PANEL_CAP = 2**20


def _expr(e):
    return e if isinstance(e, Expr) else parse_expression(str(e))


def _grid_sup(e, J, d=0):
    x = np.linspace(J[0], J[1], SUP_GRID + 1)
    j = eval_jet2(e, x)
    return float(np.max(np.abs((j.value, j.d1, j.d2)[d])))


@dataclass(frozen=True, eq=False)
class OscillatoryProblem:
    """``int_J K(x) exp(i b theta(x)) dx`` with ``kappa = inf_J |theta'|``."""

    J: tuple
    K: Expr
    theta: Expr
    b: float
    kappa: float

    @property
    def length(self):
        return self.J[1] - self.J[0]

    def integrand(self, x):
        k = eval_jet2(self.K, x).value
        t = eval_jet2(self.theta, x).value
        return k * np.exp(1j * self.b * t)

    def to_dict(self):
        return {"J": list(self.J), "K": to_source(self.K), "theta": to_source(self.theta), "b": self.b}


def make_problem(K, theta, b, J=(0.0, 1.0)) -> OscillatoryProblem:
    """Build a problem; ``kappa`` is sampled on a dense grid plus endpoints."""
    a, c = float(J[0]), float(J[1])
    if not c > a:
        raise ValueError("J must have positive length")
    K, theta = _expr(K), _expr(theta)
    x = np.linspace(a, c, SUP_GRID + 1)
    kappa = float(np.min(np.abs(eval_jet2(theta, x).d1)))
    if not kappa > 0:
        raise ValueError("theta' vanishes on J")
    return OscillatoryProblem((a, c), K, theta, float(b), kappa)


def _simpson(g, a, b):
    m = 0.5 * (a + b)
    return (b - a) / 6.0 * (g(a) + 4.0 * g(m) + g(b))


def oscillatory_integral(p: OscillatoryProblem, tol: float = 1e-12, initial: int = 16, max_panels: int = PANEL_CAP) -> complex:
    """Adaptive Simpson quadrature, refined level by level over all open panels.

    A panel of width ``w`` is accepted when its two-half estimate differs
    from the whole-panel estimate by at most ``15 tol w / |J|``; accepted
    panels contribute the Richardson-corrected value.

    Raises
    ------
    PanelCapExceeded
        If more than ``max_panels`` panels would be needed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = p.integrand
    a, b = p.J
    edges = np.linspace(a, b, initial + 1)
    lo, hi = edges[:-1], edges[1:]
    whole = _simpson(g, lo, hi)
    total = 0.0 + 0.0j
    used = lo.size
    while lo.size:
        mid = 0.5 * (lo + hi)
        left = _simpson(g, lo, mid)
        right = _simpson(g, mid, hi)
        two = left + right
        err = np.abs(two - whole)
        ok = err <= 15.0 * tol * (hi - lo) / (b - a)
        ok |= (hi - lo) <= 8 * np.spacing(np.maximum(abs(a), abs(b)))
        total += np.sum(two[ok] + (two[ok] - whole[ok]) / 15.0)
        keep = ~ok
        used += int(np.count_nonzero(keep))
        if used > max_panels:
            raise PanelCapExceeded(f"adaptive Simpson needs more than {max_panels} panels")
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    return complex(total)


def fixed_simpson(p: OscillatoryProblem, panels: int = PANEL_CAP, chunk: int = 2**16) -> complex:
    """Composite Simpson rule on ``panels`` equal panels (reference oracle)."""
    a, b = p.J
    h = (b - a) / panels
    total = 0.0 + 0.0j
    for s in range(0, panels, chunk):
        k = np.arange(s, min(s + chunk, panels))
        x0 = a + k * h
        total += np.sum(_simpson(p.integrand, x0, x0 + h))
    return complex(total)


def vdc_bound(p: OscillatoryProblem):
    """``(corrected, literal)`` integration-by-parts bounds for ``|int_J K e^{ib theta}|``.

    corrected = (2 sup|K|/kappa + sup|K| sup|theta''| |J|/kappa^2 + sup|K'| |J|/kappa) / |b|;
    the literal form has ``sup|K|/kappa`` as its first term.
    """
    if p.b == 0:
        raise ValueError("b must be nonzero")
    sK = _grid_sup(p.K, p.J)
    sdK = _grid_sup(p.K, p.J, 1)
    sd2t = _grid_sup(p.theta, p.J, 2)
    k, L, b = p.kappa, p.length, abs(p.b)
    rest = sK * sd2t * L / k**2 + sdK * L / k
    return (2.0 * sK / k + rest) / b, (sK / k + rest) / b


def random_suite(seed: int = 42, count: int = 50, kappa_min: float = 0.2):
    """Seeded problems with smooth amplitudes, ``|theta'| >= kappa_min`` and ``|b|`` in [5, 500]."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a = float(rng.uniform(-1.0, 1.0))
        L = float(rng.uniform(0.2, 2.0))
        c0, c1 = (float(v) for v in rng.normal(size=2))
        w1, p1 = float(rng.uniform(0.5, 6.0)), float(rng.uniform(0, 2 * math.pi))
        s = float(rng.uniform(0.5, 2.0)) * (1 if rng.random() < 0.5 else -1)
        w2 = float(rng.uniform(0.5, 8.0))
        amp = float(rng.uniform(0.0, 1.0)) * (abs(s) - kappa_min) / w2
        b = float(np.exp(rng.uniform(math.log(5.0), math.log(500.0)))) * (1 if rng.random() < 0.5 else -1)
        K = f"{c0!r} + {c1!r}*sin({w1!r}*x + {p1!r})"
        theta = f"{s!r}*x + {amp!r}*sin({w2!r}*x)"
        p = make_problem(K, theta, b, (a, a + L))
        if p.kappa >= kappa_min:
            out.append(p)
    return out


@dataclass(frozen=True)
class InverseJet:
    """Jets in ``x`` along the inverse branch selected by a word.

    ``point`` is ``h(x)``, ``dh`` its derivative ``J_n o h``, and ``tau``
    the jet of ``tau_n o h``. ``dh_n2`` and ``tau_n2`` are the same data
    after the first ``n2`` pull-backs, i.e. for the suffix branch ``g``.
    """

    point: float
    dh: Jet2
    tau: Jet2
    dh_n2: Jet2
    tau_n2: Jet2


def inverse_jets(sp, word, x: float, n2: int = 0) -> InverseJet:
    """Pull ``x`` back along ``word`` (``word[j]`` = lap of ``f^j h(x)``) with jets.

    Raises
    ------
    DomainMismatch
        If some intermediate point is outside the image of the required lap.
    """
    symbols = tuple(getattr(word, "symbols", word))
    n = len(symbols)
    X = Jet2(float(np.mod(x, 1.0)), 1.0, 0.0)
    T = Jet2(0.0, 0.0, 0.0)
    X2, T2 = X, T
    for step, s in enumerate(reversed(symbols)):
        lap = sp.laps[int(s)]
        y = float(np.mod(X.value, 1.0))
        if not bool(lap.contains(np.array([y]))[0]):
            raise DomainMismatch(f"point {y:.17g} is not in the image of lap {lap.index}")
        e = sp.f.branches[lap.branch]

        def fun(u, e=e):
            j = eval_jet2(e, u)
            return j.value, j.d1

        w = float(solve_increasing(fun, np.array([lap.target(y)]), lap.lo, lap.hi)[0])
        jf = eval_jet2(e, w)
        X = X.compose(float(np.mod(w, 1.0)), 1.0 / jf.d1, -jf.d2 / jf.d1**3)
        jt = sp.tau.jet(np.array([X.value]))
        T = T + X.compose(float(jt.value[0]), float(jt.d1[0]), float(jt.d2[0]))
        if step + 1 == n2:
            X2, T2 = X, T
    return InverseJet(float(X.value), Jet2(X.d1, X.d2, 0.0), T, Jet2(X2.d1, X2.d2, 0.0), T2)


def phase_difference(sp, word_j, word_k, n1: int, n2: int, x: float):
    """``(theta_jk', theta_jk'', K_jk)`` at ``x`` for two inverse branches of ``f^{n1+n2}``.

    ``theta_jk = tau_n o h_j - tau_n o h_k`` and ``K_jk = (J_n o h_j)(J_n o h_k)``.
    """
    for w in (word_j, word_k):
        if len(tuple(getattr(w, "symbols", w))) != n1 + n2:
            raise ValueError("words must have length n1 + n2")
    a = inverse_jets(sp, word_j, x, n2)
    b = inverse_jets(sp, word_k, x, n2)
    return a.tau.d1 - b.tau.d1, a.tau.d2 - b.tau.d2, a.dh.value * b.dh.value


def ip_partition(b: float, xi: float):
    """Equal cells ``I_p`` of length in ``[|b|^-(1-xi), 2|b|^-(1-xi)]`` with midpoint references.

    Returns ``(edges, references)``.
    """
    P = max(1, int(math.floor(abs(b) ** (1.0 - xi))))
    edges = np.linspace(0.0, 1.0, P + 1)
    return edges, 0.5 * (edges[:-1] + edges[1:])
