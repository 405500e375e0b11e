"""Shared test oracles: finite differences and error metrics.

The finite-difference oracle only ever evaluates the forward pass, so it
stays independent of the backward code it checks.
"""

from __future__ import annotations

import numpy as np


def finite_diff(f, xs: list[np.ndarray], h: float = 1e-4) -> list[np.ndarray]:
    """Central finite differences of scalar f(*xs) w.r.t. each array in xs."""
    grads = []
    for i, x in enumerate(xs):
        g = np.zeros_like(x, dtype=np.float64)
        flat = x.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            fp = f(*xs)
            flat[j] = orig - h
            fm = f(*xs)
            flat[j] = orig
            gflat[j] = (fp - fm) / (2.0 * h)
        grads.append(g)
    return grads


def rel_err(analytic: np.ndarray, reference: np.ndarray, floor: float = 1e-8) -> float:
    """max_i |a_i - r_i| / (|r_i| + floor), the gradient-check metric."""
    a = np.asarray(analytic, dtype=np.float64)
    r = np.asarray(reference, dtype=np.float64)
    return float(np.max(np.abs(a - r) / (np.abs(r) + floor)))


def directional_diff(f, x: np.ndarray, v: np.ndarray, h: float = 1e-6) -> float:
    """Central finite difference of f along direction v."""
    return (f(x + h * v) - f(x - h * v)) / (2.0 * h)
