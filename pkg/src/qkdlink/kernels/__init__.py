"""Hot-loop kernels: compiled extension when available, numpy fallback otherwise.

`product_mix` accumulates the distribution of a product of two independent
discrete factors on a uniform log10 grid; it dominates the runtime of PDTE
construction.  `KERNEL_BACKEND` reports which implementation was selected at
import time ("cython" or "numpy").
"""

from . import _product_py

try:
    from . import _product_cy  # compiled extension, optional

    product_mix = _product_cy.product_mix
    KERNEL_BACKEND = "cython"
except ImportError:
    product_mix = _product_py.product_mix
    KERNEL_BACKEND = "numpy"

product_mix_numpy = _product_py.product_mix

__all__ = ["product_mix", "product_mix_numpy", "KERNEL_BACKEND"]
