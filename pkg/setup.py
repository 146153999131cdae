import os

import numpy as np
from setuptools import Extension, setup

# OTDIAG_NO_EXT=1 installs the pure-Python package only
if os.environ.get("OTDIAG_NO_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "otdiag._ckernels",
                ["src/otdiag/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # no fast-math or FMA contraction: results must match the numpy fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
