"""Piecewise-constant functions on a uniform cell grid of the circle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values on cells ``[i/N, (i+1)/N)``, sampled at the cell midpoints.

    Norms follow the BV conventions: ``l1 = mean |v|``, circular
    ``var = sum |v[i+1] - v[i]|`` and ``bv = var + l1``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("GridFunction needs a non-empty 1-d array")
        object.__setattr__(self, "values", v)

    @property
    def N(self):
        return self.values.size

    @classmethod
    def midpoints(cls, N):
        return (np.arange(N) + 0.5) / N

    @classmethod
    def from_callable(cls, fn, N):
        return cls(np.asarray(fn(cls.midpoints(N))))

    @classmethod
    def constant(cls, c, N):
        return cls(np.full(N, c, dtype=complex if np.iscomplexobj(c) else float))

    @property
    def l1(self):
        return float(np.mean(np.abs(self.values)))

    @property
    def var(self):
        return float(np.sum(np.abs(np.roll(self.values, -1) - self.values)))

    @property
    def bv(self):
        return self.var + self.l1

    def bnorm(self, b):
        """Equivalent norm ``bv / (1 + |b|) + l1`` adapted to frequency ``b``."""
        return self.bv / (1.0 + abs(b)) + self.l1

    @property
    def sup(self):
        return float(np.max(np.abs(self.values)))

    def integral(self):
        return self.values.mean()

    def cell_index(self, x):
        return np.floor(np.mod(np.asarray(x, dtype=float), 1.0) * self.N).astype(np.int64) % self.N

    def __call__(self, x):
        return self.values[self.cell_index(x)]

    def interpolate(self, x):
        """Periodic cubic convolution through the midpoint samples."""
        idx, w = cubic_stencil(x, self.N)
        return np.sum(self.values[idx] * w, axis=-1)

    def _wrap(self, v):
        return GridFunction(v)

    def __add__(self, o):
        return self._wrap(self.values + (o.values if isinstance(o, GridFunction) else o))

    def __sub__(self, o):
        return self._wrap(self.values - (o.values if isinstance(o, GridFunction) else o))

    def __mul__(self, o):
        return self._wrap(self.values * (o.values if isinstance(o, GridFunction) else o))

    __rmul__ = __mul__

    def real(self):
        return GridFunction(self.values.real.copy())


def cubic_stencil(x, N):
    """Periodic Keys cubic convolution stencil on cell midpoints: ``(idx, w)`` with a trailing axis of 4."""
    s = np.mod(np.asarray(x, dtype=float), 1.0) * N - 0.5
    i0 = np.floor(s)
    t = (s - i0)[..., None]
    k = np.arange(-1, 3)
    d = np.abs(t - k)
    a = -0.5
    w = np.where(d <= 1.0, (a + 2) * d**3 - (a + 3) * d**2 + 1.0, a * d**3 - 5 * a * d**2 + 8 * a * d - 4 * a)
    w = np.where(d < 2.0, w, 0.0)
    idx = (i0.astype(np.int64)[..., None] + k) % N
    return idx, w
