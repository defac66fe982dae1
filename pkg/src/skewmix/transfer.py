"""Twisted transfer operators on grid functions.

``L_b h(y) = sum_{f x = y} J(x) h(x) exp(i b tau(x))`` is discretized by
collocation: the formula is evaluated exactly at every cell midpoint, with
``h`` read off the grid by piecewise-constant lookup. The one-step
preimage data is computed once per (map, grid) and reused for every twist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cones import fit_phi_decay
from .dynamics import preimage_tree
from .errors import DegenerateImage, GridTooCoarse, InvariantViolation, NotConverged
from .grid import GridFunction, cubic_stencil

DEFAULT_N = 2**12
LY_SLACK = 1.05
B0_DEFAULT = 2.0

_CACHE = {}


@dataclass(frozen=True, eq=False)
class Collocation:
    """Padded one-step preimage table: row ``i`` lists the preimages of midpoint ``i``."""

    N: int
    idx: np.ndarray
    J: np.ndarray
    tau: np.ndarray
    x: np.ndarray

    def weights(self, b):
        if b == 0:
            return self.J.astype(complex)
        return self.J * np.exp(1j * b * self.tau)

    def table(self, b, interp="constant"):
        """``(idx, w)`` gather table of ``L_b`` with the given lookup rule."""
        w = self.weights(b)
        if interp == "constant":
            return self.idx, w
        if interp != "cubic":
            raise ValueError(f"unknown interpolation {interp!r}")
        cidx, cw = cubic_stencil(self.x, self.N)
        K = w.shape[1]
        return cidx.reshape(self.N, 4 * K), (cw * w[:, :, None]).reshape(self.N, 4 * K)


def collocation(sp, N: int) -> Collocation:
    key = (sp.config_hash(), int(N))
    op = _CACHE.get(key)
    if op is None:
        tree = preimage_tree(sp, GridFunction.midpoints(N), 1, check_bound=False)
        counts = np.bincount(tree.owner, minlength=N)
        K = int(counts.max())
        start = np.concatenate([[0], np.cumsum(counts)[:-1]])
        col = np.arange(tree.owner.size) - start[tree.owner]
        idx = np.zeros((N, K), dtype=np.int64)
        J = np.zeros((N, K))
        tau = np.zeros((N, K))
        x = np.zeros((N, K))
        x[tree.owner, col] = tree.x
        idx[tree.owner, col] = np.floor(tree.x * N).astype(np.int64) % N
        J[tree.owner, col] = tree.J
        tau[tree.owner, col] = tree.tau
        op = Collocation(int(N), idx, J, tau, x)
        if len(_CACHE) > 32:
            _CACHE.clear()
        _CACHE[key] = op
    return op


def _apply_columns(sp, b, H, n, threads=None, backend=None, interp="constant"):
    """``L_b^n`` applied to the columns of an ``(N, P)`` array."""
    op = collocation(sp, H.shape[0])
    idx, w = op.table(b, interp)
    out = np.asarray(H, dtype=complex)
    for _ in range(n):
        out = kernels.gather_apply(idx, w, out, threads=threads, backend=backend)
    return out


def apply_twisted(sp, b: float, h, n: int = 1, N: int = None, threads=None, backend=None, interp="constant") -> GridFunction:
    """``L_b^n h`` sampled at cell midpoints.

    ``h`` is either a :class:`GridFunction`, read between midpoints by
    ``interp`` (``"constant"`` lookup or ``"cubic"`` convolution) one step at
    a time, or a callable, which is evaluated exactly at the ``n``-step
    preimages on an ``N``-cell grid.

    Raises
    ------
    CapExceeded
        For a callable ``h`` with ``n`` above the enumeration cap.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if isinstance(h, GridFunction):
        if n == 0:
            return h
        return GridFunction(_apply_columns(sp, b, h.values, n, threads, backend, interp))
    N = int(N or DEFAULT_N)
    y = GridFunction.midpoints(N)
    if n == 0:
        return GridFunction(np.asarray(h(y), dtype=complex))
    tree = preimage_tree(sp, y, n, check_bound=False)
    terms = tree.J * np.asarray(h(tree.x), dtype=complex) * np.exp(1j * b * tree.tau)
    re = np.bincount(tree.owner, weights=terms.real, minlength=N)
    im = np.bincount(tree.owner, weights=terms.imag, minlength=N)
    return GridFunction(re + 1j * im)


def invariant_density(sp, N: int = DEFAULT_N, iters: int = 2000, tol: float = 1e-12, interp: str = "constant") -> GridFunction:
    """Fixed point of ``L_0`` by power iteration from ``h = 1``, normalized in L1.

    Raises
    ------
    NotConverged
        If successive iterates still differ by ``tol`` in L1 after ``iters``.
    """
    idx, w = collocation(sp, N).table(0.0, interp)
    h = np.ones(N, dtype=complex)
    diff = math.inf
    for _ in range(iters):
        nxt = kernels.gather_apply(idx, w, h)
        nxt /= np.mean(np.abs(nxt))
        diff = float(np.mean(np.abs(nxt - h)))
        h = nxt
        if diff < tol:
            return GridFunction(h.real.copy())
    raise NotConverged(f"invariant density did not converge, L1 step {diff:.3e}", diff)


def orbit_histogram(sp, bins: int, n_points: int = 10**7, n_orbits: int = 10**4, burn: int = 100, seed: int = 42):
    """Normalized histogram of an ensemble of forward orbits.

    ``n_points`` samples are taken from ``n_orbits`` orbits after ``burn``
    steps, starting from uniformly random points.
    """
    rng = np.random.default_rng(seed)
    x = rng.random(n_orbits)
    for _ in range(burn):
        x = sp.f(x)
    counts = np.zeros(bins)
    steps = max(1, n_points // n_orbits)
    for _ in range(steps):
        counts += np.bincount(np.minimum((x * bins).astype(np.int64), bins - 1), minlength=bins)
        x = sp.f(x)
    return counts * bins / counts.sum()


def smoothness_pieces(sp):
    """Domain intervals on which ``f`` is injective and ``f, tau`` are smooth."""
    pts = [np.asarray(sp.merged_breakpoints, dtype=float)]
    pts.append(np.mod([lap.lo for lap in sp.laps], 1.0))
    bp = np.unique(np.round(np.concatenate(pts), 15))
    ends = np.append(bp[1:], bp[0] + 1.0)
    return list(zip(bp, ends))


def ly_constants(sp, grid: int = None):
    """``(sup_J, C_LY)`` for the one-step Lasota-Yorke inequality.

    ``Var(L_b h) <= 2 sup_J Var(h) + C_LY (1 + |b|) ||h||_L1`` with
    ``C_LY = max(sup|J'| + sup|phi'|, sup|tau' J|)``. The chopping-function
    bound ``sup|phi'| <= 2 sup_J / m`` uses the smallest domain length ``m``
    of a smoothness piece.

    Raises
    ------
    DegenerateImage
        If a smoothness piece has image length below ``1e-9``.
    """
    grid = int(grid or sp.validation_grid)
    sup_J = 1.0 / sp.lambda_tilde
    sup_dJ = 0.0
    sup_tJ = 0.0
    min_len = math.inf
    for a, b in smoothness_pieces(sp):
        x = np.linspace(a, b, max(grid // max(1, len(sp.laps)), 16))
        x[-1] = np.nextafter(b, a)
        jf = sp.f.jet(np.mod(x, 1.0))
        sup_dJ = max(sup_dJ, float(np.max(np.abs(jf.d2) / jf.d1**2)))
        sup_tJ = max(sup_tJ, float(np.max(np.abs(sp.tau.jet(np.mod(x, 1.0)).d1) / jf.d1)))
        image = float(np.sum(np.diff(jf.value)))
        if image < 1e-9:
            raise DegenerateImage(f"piece [{a:.6g}, {b:.6g}] has image length {image:.3e}")
        min_len = min(min_len, b - a)
    sup_dphi = 2.0 * sup_J / min_len
    return float(sup_J), float(max(sup_dJ + sup_dphi, sup_tJ))


def ly_details(sp, sup_J=None, C_LY=None):
    if sup_J is None or C_LY is None:
        sup_J, C_LY = ly_constants(sp)
    contraction = 2.0 * sup_J
    C_lambda = 1.0 + C_LY / (1.0 - contraction)
    return contraction, C_lambda


def empirical_ly_check(sp, b: float, h: GridFunction, n: int, constants=None, slack: float = LY_SLACK, details=False):
    """Check ``||L_b^n h||_BV <= C (2 sup_J)^n ||h||_BV + C (1+|b|) ||h||_L1``.

    ``constants`` is an optional ``(sup_J, C_LY)`` pair. With ``details``
    the tuple ``(ok, lhs, rhs)`` is returned instead of the flag.
    """
    sup_J, C_LY = constants if constants is not None else ly_constants(sp)
    q, C = ly_details(sp, sup_J, C_LY)
    out = apply_twisted(sp, b, h, n)
    lhs = out.bv
    rhs = C * q**n * h.bv + C * (1.0 + abs(b)) * h.l1
    ok = lhs <= slack * rhs
    return (ok, lhs, rhs) if details else ok


@dataclass(frozen=True)
class SchemeConstants:
    """Constants of the two-time-scale decay scheme for one skew product."""

    lambda_tilde: float
    Lambda: float
    delta: float
    rho1: float
    xi: float
    rho2: float
    beta: float
    b0: float
    b_max: float
    N_max: int
    sup_J: float
    C_LY: float
    C_lambda: float
    ly_rate: float
    n0: int
    C_beta: float
    gamma: float
    C_gamma: float
    gamma3: float
    gamma4: float
    gamma5: float
    gamma6: float
    gamma7: float
    gamma8: float
    gamma2_theory: float
    alpha: float
    C5: float
    C6: float
    C7: float
    C8: float
    phis: tuple = field(default=())

    @property
    def rho(self):
        return self.rho1 + self.rho2

    def n1(self, b):
        return math.ceil(self.rho1 * math.log(abs(b)))

    def n2(self, b):
        return math.ceil(self.rho2 * math.log(abs(b)))

    def n(self, b):
        return self.n1(b) + self.n2(b)

    def as_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["phis"] = [float(v) for v in self.phis]
        d["rho"] = self.rho
        return d


def scheme_constants(sp, gamma: float = None, C_gamma: float = None, N_max: int = 2**16, phi_range=range(2, 9)) -> SchemeConstants:
    """Evaluate every constant of the decay scheme.

    ``gamma, C_gamma`` default to a fit of the measured ``phi(n)``.
    """
    lam, Lam = sp.lambda_tilde, sp.Lambda
    beta = lam / 2.0
    rho1 = 2.0 / math.log(lam)
    xi = math.log(beta) / (2.0 * math.log(lam))
    rho2 = xi / (2.0 * math.log(Lam))
    rho = rho1 + rho2
    sup_J, C_LY = ly_constants(sp)
    q, C_lambda = ly_details(sp, sup_J, C_LY)
    phis = ()
    if gamma is None or C_gamma is None:
        g, Cg, phis = fit_phi_decay(sp, phi_range)
        gamma = g if gamma is None else gamma
        C_gamma = Cg if C_gamma is None else C_gamma
    C_beta = 4.0 * Lam * beta / (sp.delta * lam * (beta - 1.0))
    g6 = min(math.log(beta) - 2.0 * xi / rho, (1.0 - xi) / rho)
    g7 = 2.0 * xi / (3.0 * rho2) - math.log(Lam)
    g8 = rho1 / rho * min(gamma, g7)
    g3 = min(g6, g8 / 2.0)
    g4 = min(xi / (2.0 * rho), g3)
    g5 = min(math.log(lam), g4)
    g2 = g5 / 4.0
    C6 = sp.sup_d2f / (lam - 1.0)
    C7 = (sp.sup_d2tau + sp.sup_dtau * C6) / (1.0 - 1.0 / lam)
    C8 = 8.0 * C6 * (1.0 + C7 + 2.0 * C6) / sp.C1**2 if sp.C1 > 0 else math.inf
    return SchemeConstants(
        lambda_tilde=lam,
        Lambda=Lam,
        delta=sp.delta,
        rho1=rho1,
        xi=xi,
        rho2=rho2,
        beta=beta,
        b0=B0_DEFAULT,
        b_max=(N_max / 4.0) ** (1.0 / (1.0 + xi)),
        N_max=int(N_max),
        sup_J=sup_J,
        C_LY=C_LY,
        C_lambda=C_lambda,
        ly_rate=1.0 / q,
        n0=math.ceil(math.log(4.0 * C_lambda) / math.log(lam)),
        C_beta=C_beta,
        gamma=float(gamma),
        C_gamma=float(C_gamma),
        gamma3=g3,
        gamma4=g4,
        gamma5=g5,
        gamma6=g6,
        gamma7=g7,
        gamma8=g8,
        gamma2_theory=g2,
        alpha=rho * g2,
        C5=8.0 * (1.0 + 2.0 * C_beta),
        C6=C6,
        C7=C7,
        C8=C8,
        phis=tuple(float(v) for v in phis),
    )


def hl_cells(b: float, xi: float) -> int:
    """Cell count of the ``H_l`` partition: largest power of two ``<= |b|^(1+xi)``."""
    target = abs(b) ** (1.0 + xi)
    return 1 << max(0, int(math.floor(math.log2(target))))


def hl_average(h: GridFunction, b: float, xi: float) -> GridFunction:
    """Average of ``h`` over each cell of the ``H_l`` partition.

    Raises
    ------
    GridTooCoarse
        If an ``H_l`` cell holds fewer than four grid cells.
    InvariantViolation
        If ``||h - h_b||_L1 > 2 |b|^-(1+xi) ||h||_BV``.
    """
    M = hl_cells(b, xi)
    if h.N % M or h.N // M < 4:
        raise GridTooCoarse(f"N = {h.N} does not resolve {M} cells of the H_l partition")
    avg = np.repeat(h.values.reshape(M, -1).mean(axis=1), h.N // M)
    out = GridFunction(avg)
    err = (h - out).l1
    bound = 2.0 * abs(b) ** (-(1.0 + xi)) * h.bv
    if err > bound * (1.0 + 1e-12) + 1e-15:
        raise InvariantViolation(f"H_l approximation error {err:.3e} exceeds {bound:.3e}")
    return out


def random_bv_probes(rng, N: int, count: int):
    """Seeded complex BV probes alternating step functions and trig polynomials."""
    x = GridFunction.midpoints(N)
    out = []
    for k in range(count):
        if k % 2 == 0:
            jumps = np.sort(rng.random(rng.integers(1, 11)))
            vals = rng.normal(size=jumps.size) + 1j * rng.normal(size=jumps.size)
            cell = np.searchsorted(jumps, x, side="right") % jumps.size
            out.append(GridFunction(vals[cell]))
        else:
            deg = int(rng.integers(1, 6))
            c = rng.normal(size=2 * deg + 1) + 1j * rng.normal(size=2 * deg + 1)
            modes = np.arange(-deg, deg + 1)
            out.append(GridFunction(np.exp(2j * np.pi * np.outer(x, modes)) @ c))
    return out


@dataclass(frozen=True, eq=False)
class NormDecayResult:
    b: float
    n_b: int
    probe_ids: tuple
    ratios: np.ndarray
    max_ratio: float
    gamma2_est: float
    N: int

    def rows(self):
        return [(pid, float(r), self.n_b, self.gamma2_est) for pid, r in zip(self.probe_ids, self.ratios)]


def norm_decay_experiment(
    sp,
    b: float,
    consts: SchemeConstants,
    N: int = 2**13,
    n_random: int = 20,
    seed: int = 42,
    extra_probes=(),
    threads=None,
) -> NormDecayResult:
    """Probe estimate of ``||L_b^{n(b)}||_(b)``.

    Probes are the indicators of the ``H_l`` cells, ``n_random`` seeded
    random BV functions, and any ``extra_probes`` (callables, applied with
    exact preimages). Returns every ratio ``||L^n h||_(b) / ||h||_(b)``.

    Raises
    ------
    GridTooCoarse
        If ``N < 4 |b|^(1+xi)``.
    """
    if abs(b) < consts.b0:
        raise ValueError(f"|b| = {abs(b)} is below b0 = {consts.b0}")
    if N < 4.0 * abs(b) ** (1.0 + consts.xi):
        raise GridTooCoarse(f"N = {N} < 4 |b|^(1+xi) = {4.0 * abs(b) ** (1.0 + consts.xi):.1f}")
    n = consts.n(b)
    M = hl_cells(b, consts.xi)
    ids, ratios = [], []
    cells = np.arange(N) * M // N
    H = (cells[:, None] == np.arange(M)[None, :]).astype(complex)
    rng = np.random.default_rng(seed)
    probes = random_bv_probes(rng, N, n_random)
    if probes:
        H = np.concatenate([H, np.stack([p.values for p in probes], axis=1)], axis=1)
    out = _apply_columns(sp, b, H, n, threads=threads)
    for k in range(H.shape[1]):
        before = GridFunction(H[:, k]).bnorm(b)
        ratios.append(GridFunction(out[:, k]).bnorm(b) / before)
        ids.append(f"H{k}" if k < M else f"R{k - M}")
    for k, fn in enumerate(extra_probes):
        h0 = apply_twisted(sp, b, fn, 0, N=N)
        hn = apply_twisted(sp, b, fn, n, N=N)
        ratios.append(hn.bnorm(b) / h0.bnorm(b))
        ids.append(f"X{k}")
    ratios = np.array(ratios)
    mx = float(ratios.max())
    return NormDecayResult(float(b), n, tuple(ids), ratios, mx, -math.log(mx) / n, N)
