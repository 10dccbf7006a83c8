"""Weighting kernels: compactly supported, symmetric, peak at most 1.

The polynomial kernels are kept in unnormalized (peak-scaled) form since
the weighting assumption bounds the sup, not the integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

__all__ = ["Kernel", "KERNELS", "limit_moment", "half_moment"]


@dataclass(frozen=True)
class Kernel:
    """Symmetric kernel supported on [-1, 1] with sup at most 1.

    ``holder_rho``/``holder_kappa`` give the Hölder modulus of the kernel
    (|K(x)-K(y)| <= rho |x-y|^kappa); the rectangular kernel is admitted
    without one and carries rho = None.
    """

    name: str
    fn: Callable
    peak: float
    holder_rho: Optional[float]
    holder_kappa: float
    # closed-form half moment int_0^1 y^m K(y) dy as a function of m
    _half: Callable = None

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = self.fn(u)
        return out if out.ndim else float(out)


def _rect(u):
    return np.where(np.abs(u) <= 1.0, 0.5, 0.0)


def _tri(u):
    return np.maximum(1.0 - np.abs(u), 0.0)


def _epan(u):
    return np.maximum(1.0 - u * u, 0.0)


def _quartic(u):
    return np.maximum(1.0 - u * u, 0.0) ** 2


KERNELS = {
    "rect": Kernel("rect", _rect, 0.5, None, 1.0,
                   _half=lambda m: 0.5 / (m + 1.0)),
    "tri": Kernel("tri", _tri, 1.0, 1.0, 1.0,
                  _half=lambda m: 1.0 / (m + 1.0) - 1.0 / (m + 2.0)),
    "epan": Kernel("epan", _epan, 1.0, 2.0, 1.0,
                   _half=lambda m: 1.0 / (m + 1.0) - 1.0 / (m + 3.0)),
    "quartic": Kernel("quartic", _quartic, 1.0, 8.0 / (3.0 * math.sqrt(3.0)), 1.0,
                      _half=lambda m: (1.0 / (m + 1.0) - 2.0 / (m + 3.0)
                                       + 1.0 / (m + 5.0))),
}


def half_moment(alpha: int, beta: float, kernel: Kernel,
                quadrature: bool = False) -> float:
    """One-sided moment int_0^1 y^(alpha+beta) K(y) dy.

    Closed form by default; ``quadrature=True`` forces the adaptive
    integrator (cross-check path).
    """
    m = alpha + beta
    if m <= -1.0:
        raise ValueError("alpha + beta must exceed -1")
    if quadrature or kernel._half is None:
        val, _ = integrate.quad(lambda y: y ** m * kernel.fn(np.float64(y)),
                                0.0, 1.0, limit=60)
        return val
    return float(kernel._half(m))


def limit_moment(alpha: int, beta: float, kernel: Kernel,
                 quadrature: bool = False) -> float:
    """Moment (1 + (-1)^alpha) int_0^1 y^(alpha+beta) K(y) dy.

    Zero for odd alpha by the parity factor; beta > -1 required.
    """
    if alpha < 0 or alpha != int(alpha):
        raise ValueError("alpha must be a natural number")
    if beta <= -1.0:
        raise ValueError("beta must exceed -1")
    if alpha % 2 == 1:
        return 0.0
    return 2.0 * half_moment(int(alpha), beta, kernel, quadrature=quadrature)
