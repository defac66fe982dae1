"""Numerical toolkit for mixing of piecewise expanding skew products on the 2-torus.

The skew product is ``F(x, u) = (f(x), u + tau(x))`` with ``f`` a piecewise
C2 expanding circle map and ``tau`` a piecewise C2 roof function.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .mapspec import SkewProduct, build_skew_product, example, from_config

__all__ = ["BACKEND", "SkewProduct", "build_skew_product", "example", "from_config", "__version__"]
