"""Pure-numpy fallback for the log-domain product-mixing kernel."""

from __future__ import annotations

import numpy as np


def product_mix(log_a: np.ndarray, p_a: np.ndarray,
                log_b: np.ndarray, p_b: np.ndarray,
                shift: float, log_lo: float, dlog: float,
                n_bins: int) -> np.ndarray:
    """Distribution of the product of two independent discrete factors.

    Factors are given as (log10 value, probability) atoms; the product is
    accumulated on a uniform log10 grid of `n_bins` bin centers starting at
    `log_lo` with spacing `dlog`.  Mass is split linearly between the two
    nearest bins so that atoms sitting exactly on a center stay put;
    out-of-range mass is lumped into the edge bins.
    """
    pos = (log_a[:, None] + log_b[None, :] + shift - log_lo) / dlog
    weight = (p_a[:, None] * p_b[None, :]).ravel()
    pos = np.clip(pos.ravel(), 0.0, n_bins - 1.0)
    lower = np.floor(pos).astype(np.intp)
    frac = pos - lower
    upper = np.minimum(lower + 1, n_bins - 1)
    out = np.bincount(lower, weights=weight * (1.0 - frac), minlength=n_bins)
    out += np.bincount(upper, weights=weight * frac, minlength=n_bins)
    return out
