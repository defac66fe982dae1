"""Piecewise-C2 circle maps and validated skew products.

Circle coordinates live in ``[0, 1)``. A map with breakpoints
``a_0 < ... < a_{J-1}`` has branch ``i`` on ``[a_i, a_{i+1}]`` where
``a_J = a_0 + 1``; branch expressions are evaluated in these *unwrapped*
coordinates, so a point ``x < a_0`` is handed to the last branch as ``x + 1``.
Values of a circle-valued branch are lifted reals; reduce mod 1 for the circle.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    NonMonotoneBranch,
    NotCovering,
    NotExpanding,
    TauPiecewiseConstant,
)
from .expr import Expr, constant_value, parse_expression, to_source
from .jet import Jet2, eval_jet2
from .roots import solve_increasing

DEFAULT_VALIDATION_GRID = 10_000
DELTA_CAP = 0.45
BOUNDARY_FLAG = 1e-12


@dataclass(frozen=True, eq=False)
class PiecewiseC2Map:
    breakpoints: np.ndarray
    branches: tuple
    kind: str = "circle"

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size == 0:
            raise ConfigError("at least one breakpoint is required")
        if np.any(bp < 0) or np.any(bp >= 1):
            raise ConfigError("breakpoints must lie in [0, 1)")
        if np.any(np.diff(bp) <= 0):
            raise ConfigError("breakpoints must be strictly increasing")
        if len(self.branches) != bp.size:
            raise ConfigError(f"{bp.size} breakpoints need {bp.size} branches, got {len(self.branches)}")
        if self.kind not in ("circle", "real"):
            raise ConfigError(f"unknown map kind {self.kind!r}")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "branches", tuple(self.branches))

    @property
    def n_branches(self):
        return self.breakpoints.size

    def interval(self, i):
        """Closure of branch ``i`` in unwrapped coordinates."""
        bp = self.breakpoints
        hi = bp[i + 1] if i + 1 < bp.size else bp[0] + 1.0
        return float(bp[i]), float(hi)

    def locate(self, x):
        """Branch index and unwrapped coordinate of circle points ``x``."""
        x = np.mod(np.asarray(x, dtype=float), 1.0)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        xu = np.where(idx < 0, x + 1.0, x)
        idx = np.where(idx < 0, self.n_branches - 1, idx)
        return idx, xu

    def branch_jet(self, i, xu):
        return eval_jet2(self.branches[i], xu)

    def jet(self, x):
        """Jet of the (lifted) map at circle points ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx, xu = self.locate(x)
        v = np.empty_like(xu)
        d1 = np.empty_like(xu)
        d2 = np.empty_like(xu)
        for i in np.unique(idx):
            m = idx == i
            j = self.branch_jet(int(i), xu[m])
            v[m], d1[m], d2[m] = j.value, j.d1, j.d2
        return Jet2(v, d1, d2)

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        v = self.jet(x).value
        if self.kind == "circle":
            v = np.mod(v, 1.0)
        return float(v[0]) if scalar else v

    def to_dict(self):
        return {
            "breakpoints": [float(b) for b in self.breakpoints],
            "branches": [to_source(b) for b in self.branches],
        }


def make_map(spec, kind="circle") -> PiecewiseC2Map:
    """Build a map from a config fragment.

    ``spec`` is a dict with ``breakpoints`` (numbers or constant expressions
    such as ``"1/3"``) and ``branches`` (a list of expressions, or one string
    used on every branch), or a bare expression string meaning one branch on
    ``[0, 1]``.
    """
    if isinstance(spec, PiecewiseC2Map):
        return spec
    if isinstance(spec, (str, int, float)):
        spec = {"breakpoints": [0.0], "branches": [str(spec)]}
    if not isinstance(spec, dict):
        raise ConfigError(f"cannot build a map from {type(spec).__name__}")
    bps = spec.get("breakpoints", [0.0])
    try:
        bp = [constant_value(b) for b in bps]
    except Exception as exc:
        raise ConfigError(f"bad breakpoint: {exc}") from exc
    branches = spec.get("branches")
    if branches is None:
        raise ConfigError("map needs 'branches'")
    if isinstance(branches, str):
        branches = [branches] * len(bp)
    exprs = [b if isinstance(b, Expr) else parse_expression(str(b)) for b in branches]
    return PiecewiseC2Map(np.array(bp), tuple(exprs), kind)


@dataclass(frozen=True)
class Lap:
    """Maximal sub-interval of a branch whose lifted image has length <= 1.

    Inverse branches are defined lap by lap, so each lap contributes at most
    one preimage of any circle point. Image membership is half-open,
    ``[c0, c1)`` mod 1, so points on a shared image boundary are counted once.
    """

    index: int
    branch: int
    lo: float
    hi: float
    c0: float
    c1: float

    @property
    def full(self):
        return self.c1 - self.c0 >= 1.0 - BOUNDARY_FLAG

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        if self.full:
            return np.ones(y.shape, dtype=bool)
        return np.mod(y - self.c0, 1.0) < (self.c1 - self.c0)

    def target(self, y):
        return self.c0 + np.mod(np.asarray(y, dtype=float) - self.c0, 1.0)

    def near_boundary(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape, dtype=bool)
        for c in (self.c0, self.c1):
            d = np.abs(np.mod(y - c + 0.5, 1.0) - 0.5)
            out |= d < BOUNDARY_FLAG
        return out


@dataclass(frozen=True, eq=False)
class SkewProduct:
    """The skew product ``F(x, u) = (f(x), u + tau(x))`` with derived constants."""

    f: PiecewiseC2Map
    tau: PiecewiseC2Map
    lambda_tilde: float
    Lambda: float
    C1: float
    delta: float
    merged_breakpoints: np.ndarray
    laps: tuple
    sup_dtau: float
    sup_d2tau: float
    sup_tau: float
    sup_d2f: float
    tau_piecewise_constant: bool = False
    validation_grid: int = DEFAULT_VALIDATION_GRID
    config: dict = field(default_factory=dict)

    @property
    def beta(self):
        return self.lambda_tilde / 2.0

    @property
    def sup_J(self):
        return 1.0 / self.lambda_tilde

    def F(self, x, u):
        x = np.asarray(x, dtype=float)
        return self.f(x), np.mod(u + self.tau(x), 1.0)

    def config_hash(self):
        blob = json.dumps(self.config, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def summary(self):
        return {
            "lambda_tilde": self.lambda_tilde,
            "Lambda": self.Lambda,
            "C1": self.C1,
            "delta": self.delta,
            "sup_dtau": self.sup_dtau,
            "n_laps": len(self.laps),
            "tau_piecewise_constant": self.tau_piecewise_constant,
        }


def _grid(lo, hi, n):
    return np.linspace(lo, hi, max(int(n), 2))


def _compute_laps(f: PiecewiseC2Map):
    laps = []
    for i in range(f.n_branches):
        lo, hi = f.interval(i)
        expr = f.branches[i]
        c0 = float(eval_jet2(expr, lo).value)
        c1 = float(eval_jet2(expr, hi).value)
        cuts = [m for m in range(math.floor(c0) + 1, math.ceil(c1)) if c0 + BOUNDARY_FLAG < m < c1 - BOUNDARY_FLAG]
        xs = []
        if cuts:

            def fun(x, e=expr):
                j = eval_jet2(e, x)
                return j.value, j.d1

            xs = list(solve_increasing(fun, np.array(cuts, dtype=float), lo, hi))
        edges = [lo] + xs + [hi]
        values = [c0] + [float(m) for m in cuts] + [c1]
        for k in range(len(edges) - 1):
            laps.append(Lap(len(laps), i, float(edges[k]), float(edges[k + 1]), values[k], values[k + 1]))
    return tuple(laps)


def _check_covering(laps):
    arcs = []
    for lap in laps:
        length = lap.c1 - lap.c0
        if length >= 1.0 - BOUNDARY_FLAG:
            return
        s = lap.c0 % 1.0
        if s + length <= 1.0:
            arcs.append((s, s + length))
        else:
            arcs.append((s, 1.0))
            arcs.append((0.0, s + length - 1.0))
    arcs.sort()
    reach = 0.0
    for s, e in arcs:
        if s > reach + 1e-12:
            raise NotCovering(f"branch images leave the gap ({reach:.6g}, {s:.6g}) uncovered")
        reach = max(reach, e)
    if reach < 1.0 - 1e-12:
        raise NotCovering(f"branch images leave the gap ({reach:.6g}, 1) uncovered")


def build_skew_product(f_spec, tau_spec, options=None) -> SkewProduct:
    """Validate ``(f, tau)`` and derive the constants of the skew product.

    Parameters
    ----------
    f_spec, tau_spec
        Map specifications accepted by :func:`make_map`.
    options : dict, optional
        ``validation_grid`` (samples per branch, default 10^4) and
        ``allow_constant_tau`` (default False).

    Raises
    ------
    NonMonotoneBranch, NotExpanding, NotCovering
        When the base map violates the hypotheses.
    TauPiecewiseConstant
        When ``sup |tau'| = 0`` and ``allow_constant_tau`` is not set.
    """
    options = dict(options or {})
    grid = int(options.get("validation_grid", DEFAULT_VALIDATION_GRID))
    f = make_map(f_spec, "circle")
    tau = make_map(tau_spec, "real")

    lam = math.inf
    Lam = 0.0
    sup_d2f = 0.0
    for i in range(f.n_branches):
        lo, hi = f.interval(i)
        j = f.branch_jet(i, _grid(lo, hi, grid))
        d1 = np.asarray(j.d1)
        if not (np.all(d1 > 0) or np.all(d1 < 0)):
            raise NonMonotoneBranch(f"branch {i} of f is not strictly monotone on [{lo:.6g}, {hi:.6g}]")
        lam = min(lam, float(d1.min()))
        Lam = max(Lam, float(np.abs(d1).max()))
        sup_d2f = max(sup_d2f, float(np.abs(j.d2).max()))
    if not lam > 2.0:
        raise NotExpanding(f"inf f' = {lam:.12g} is not > 2")

    laps = _compute_laps(f)
    _check_covering(laps)

    sup_dtau = sup_d2tau = sup_tau = 0.0
    for i in range(tau.n_branches):
        lo, hi = tau.interval(i)
        j = tau.branch_jet(i, _grid(lo, hi, grid))
        sup_dtau = max(sup_dtau, float(np.abs(j.d1).max()))
        sup_d2tau = max(sup_d2tau, float(np.abs(j.d2).max()))
        sup_tau = max(sup_tau, float(np.abs(j.value).max()))
    constant = sup_dtau == 0.0
    if constant and not options.get("allow_constant_tau", False):
        raise TauPiecewiseConstant(tau)

    lengths = np.diff(np.append(f.breakpoints, f.breakpoints[0] + 1.0))
    delta = min(float(lengths.min()), DELTA_CAP)
    merged = np.unique(np.concatenate([f.breakpoints, tau.breakpoints]))
    config = {
        "f": f.to_dict(),
        "tau": tau.to_dict(),
        "validation_grid": grid,
    }
    return SkewProduct(
        f=f,
        tau=tau,
        lambda_tilde=lam,
        Lambda=Lam,
        C1=2.0 * sup_dtau / (lam - 1.0),
        delta=delta,
        merged_breakpoints=merged,
        laps=laps,
        sup_dtau=sup_dtau,
        sup_d2tau=sup_d2tau,
        sup_tau=sup_tau,
        sup_d2f=sup_d2f,
        tau_piecewise_constant=constant,
        validation_grid=grid,
        config=config,
    )


def load_config(path) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def from_config(cfg, **overrides) -> SkewProduct:
    """Build a :class:`SkewProduct` from a config dict or JSON path."""
    if isinstance(cfg, (str, Path)):
        cfg = load_config(cfg)
    if "f" not in cfg or "tau" not in cfg:
        raise ConfigError("config needs both 'f' and 'tau'")
    options = {"validation_grid": cfg.get("validation_grid", DEFAULT_VALIDATION_GRID)}
    options.update(cfg.get("options", {}))
    options.update(overrides)
    return build_skew_product(cfg["f"], cfg["tau"], options)


def example_path(name) -> Path:
    """Path of a bundled example config (``name`` with or without ``.json``)."""
    name = name if name.endswith(".json") else name + ".json"
    return Path(__file__).parent / "data" / name


def example(name, **overrides) -> SkewProduct:
    return from_config(example_path(name), **overrides)
