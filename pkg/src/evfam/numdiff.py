"""Central finite differences with coordinate-wise relative steps.

Step sizes follow h_i = base * (1 + |x_i|); the default base of 1e-6 is
near-optimal for first derivatives in double precision, and 1e-4 (about
eps^(1/4)) for second derivatives.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["fd_gradient", "fd_jacobian", "fd_hessian", "DEFAULT_STEP", "DEFAULT_STEP_SECOND"]

DEFAULT_STEP = 1e-6
DEFAULT_STEP_SECOND = 1e-4


def _steps(x: np.ndarray, base: float) -> np.ndarray:
    return base * (1.0 + np.abs(x))


def fd_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, base: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = _steps(x, base)
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * h[i])
    return grad


def fd_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, base: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference Jacobian of a vector function, shape (m, n)."""
    x = np.asarray(x, dtype=float)
    h = _steps(x, base)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        cols.append((np.asarray(f(x + e), dtype=float) - np.asarray(f(x - e), dtype=float)) / (2.0 * h[i]))
    return np.stack(cols, axis=-1)


def fd_hessian(f: Callable[[np.ndarray], float], x: np.ndarray, base: float = DEFAULT_STEP_SECOND) -> np.ndarray:
    """Central-difference Hessian of a scalar function.

    Diagonal entries use the three-point second difference, off-diagonal
    entries the four-point cross formula; the result is exactly symmetric.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    h = _steps(x, base)
    hess = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            cross = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej))
            hess[i, j] = hess[j, i] = cross / (4.0 * h[i] * h[j])
    return hess
