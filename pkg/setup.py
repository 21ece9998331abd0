"""Build script: compiles the optional Cython kernel when the toolchain allows.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any build failure here downgrades to a warning
instead of aborting the install.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [Extension("qkdlink.kernels._product_cy",
                   ["src/qkdlink/kernels/_product_cy.pyx"])],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
except Exception as exc:  # missing cython/compiler: fall back to pure python
    warnings.warn(f"compiled kernel skipped ({exc}); using the numpy fallback")

setup(ext_modules=ext_modules)
