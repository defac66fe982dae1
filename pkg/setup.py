import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the package falls back at import
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("SKEWMIX_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "skewmix._native",
                ["src/skewmix/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-fcx-limited-range", "-fopenmp"],
                extra_link_args=["-fopenmp"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
