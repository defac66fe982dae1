"""Second-order forward-mode automatic differentiation.

A :class:`Jet2` carries ``(value, d1, d2)``; fields may be floats or numpy
arrays, so one evaluation pass differentiates a whole grid of points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expr import BinOp, Call, Expr, Neg, Num, Pi, Var


@dataclass(frozen=True)
class Jet2:
    value: object
    d1: object = 0.0
    d2: object = 0.0

    @classmethod
    def const(cls, c):
        return cls(c, 0.0, 0.0)

    @classmethod
    def variable(cls, x):
        x = np.asarray(x, dtype=float) if not np.isscalar(x) else float(x)
        return cls(x, np.ones_like(x) if not np.isscalar(x) else 1.0, 0.0 * x)

    def __add__(self, o):
        o = _lift(o)
        return Jet2(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.d1, -self.d2)

    def __sub__(self, o):
        return self + (-_lift(o))

    def __rsub__(self, o):
        return _lift(o) - self

    def __mul__(self, o):
        o = _lift(o)
        return Jet2(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _lift(o)
        if np.any(np.asarray(o.value) == 0):
            raise DomainError("division by zero")
        return self * o.reciprocal()

    def __rtruediv__(self, o):
        return _lift(o) / self

    def reciprocal(self):
        v = self.value
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def compose(self, g, dg, d2g):
        """Chain rule: jet of ``G(self)`` given ``G, G', G''`` at ``self.value``."""
        return Jet2(g, dg * self.d1, d2g * self.d1**2 + dg * self.d2)

    def __pow__(self, o):
        o = _lift(o)
        if _is_const(o):
            return self._pow_const(o.value)
        if np.any(np.asarray(self.value) <= 0):
            raise DomainError("non-constant exponent requires a positive base")
        return jet_exp(o * jet_log(self))

    def _pow_const(self, c):
        c = float(c) if np.isscalar(c) else c
        if np.isscalar(c) and c == 0.0:
            return Jet2.const(1.0 + 0.0 * self.value)
        if np.isscalar(c) and c == 1.0:
            return self
        v = np.asarray(self.value, dtype=float)
        integral = np.isscalar(c) and float(c).is_integer()
        if not integral and np.any(v < 0):
            raise DomainError("fractional power of a negative value")
        if np.any(v == 0) and (not integral or c < 2):
            raise DomainError("singular power at zero")
        with np.errstate(all="ignore"):
            out = self.compose(v**c, c * v ** (c - 1), c * (c - 1) * v ** (c - 2))
        _finite(out)
        return _unwrap_scalar(out, self.value)


def _is_const(j):
    return np.all(np.asarray(j.d1) == 0) and np.all(np.asarray(j.d2) == 0)


def _lift(o):
    return o if isinstance(o, Jet2) else Jet2.const(o)


def _unwrap_scalar(j, like):
    if np.isscalar(like):
        return Jet2(float(j.value), float(j.d1), float(j.d2))
    return j


def _finite(j):
    for part in (j.value, j.d1, j.d2):
        if not np.all(np.isfinite(part)):
            raise DomainError("evaluation produced a non-finite value")
    return j


def jet_sin(a):
    s, c = np.sin(a.value), np.cos(a.value)
    return a.compose(s, c, -s)


def jet_cos(a):
    s, c = np.sin(a.value), np.cos(a.value)
    return a.compose(c, -s, -c)


def jet_exp(a):
    with np.errstate(over="ignore"):
        e = np.exp(a.value)
    return _finite(a.compose(e, e, e))


def jet_log(a):
    if np.any(np.asarray(a.value) <= 0):
        raise DomainError("log of non-positive value")
    v = a.value
    return a.compose(np.log(v), 1.0 / v, -1.0 / v**2)


_FUNCS = {"sin": jet_sin, "cos": jet_cos, "exp": jet_exp, "log": jet_log}


def _eval(e, x):
    if isinstance(e, Num):
        return Jet2.const(e.value)
    if isinstance(e, Pi):
        return Jet2.const(math.pi)
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.operand, x)
    if isinstance(e, BinOp):
        a, b = _eval(e.left, x), _eval(e.right, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b
        return a**b
    if isinstance(e, Call):
        return _FUNCS[e.func](_eval(e.arg, x))
    raise TypeError(f"not an expression node: {e!r}")


def eval_jet2(e: Expr, x) -> Jet2:
    """Value, first and second derivative of ``e`` at ``x`` (scalar or array).

    Raises
    ------
    DomainError
        If any intermediate leaves the domain of an operation.
    """
    xj = Jet2.variable(x)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = _eval(e, xj)
    if np.isscalar(x) or np.ndim(x) == 0:
        out = Jet2(float(out.value), float(out.d1), float(out.d2))
    else:
        shape = np.shape(x)
        out = Jet2(*(np.broadcast_to(np.asarray(p, dtype=float), shape).copy() for p in (out.value, out.d1, out.d2)))
    return _finite(out)
