"""Tiny dense linear algebra for the (k+1)x(k+1) normal-equation systems.

Self-contained on purpose: the matrices here never exceed 7x7, so cyclic
Jacobi rotations and an unblocked Cholesky are both simpler and easier
to audit than a LAPACK dependency.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["jacobi_smallest_eig", "solve_spd"]


def jacobi_smallest_eig(a: np.ndarray, tol: float = 1e-12) -> float:
    """Smallest eigenvalue of a small symmetric matrix by cyclic Jacobi.

    Sweeps rotations until the off-diagonal Frobenius norm drops below
    ``tol`` relative to the matrix scale.
    """
    a = np.array(a, dtype=float, copy=True)
    m = a.shape[0]
    if m == 1:
        return float(a[0, 0])
    scale = max(1.0, float(np.abs(a).max()))
    for _ in range(100):
        off = 0.0
        for p in range(m - 1):
            for q in range(p + 1, m):
                off += 2.0 * a[p, q] ** 2
        if math.sqrt(off) <= tol * scale:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(m)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    return float(np.diag(a).min())


def _solve_gepp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting (fallback path)."""
    a = np.array(a, dtype=float, copy=True)
    b = np.array(b, dtype=float, copy=True)
    m = len(b)
    for j in range(m):
        piv = j + int(np.argmax(np.abs(a[j:, j])))
        if a[piv, j] == 0.0:
            raise np.linalg.LinAlgError("singular system")
        if piv != j:
            a[[j, piv]] = a[[piv, j]]
            b[[j, piv]] = b[[piv, j]]
        for i in range(j + 1, m):
            f = a[i, j] / a[j, j]
            a[i, j:] -= f * a[j, j:]
            b[i] -= f * b[j]
    x = np.zeros(m)
    for j in range(m - 1, -1, -1):
        x[j] = (b[j] - a[j, j + 1:] @ x[j + 1:]) / a[j, j]
    return x


def solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b for symmetric positive definite a via Cholesky.

    Falls back to partially pivoted elimination if a pivot dips below
    the positivity slack (the caller may pass a matrix that is only
    numerically semidefinite).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = len(b)
    scale = max(1.0, float(np.abs(np.diag(a)).max()))
    low = np.zeros((m, m))
    for j in range(m):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if d <= 1e-14 * scale:
            return _solve_gepp(a, b)
        low[j, j] = math.sqrt(d)
        if j + 1 < m:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    y = np.zeros(m)
    for j in range(m):
        y[j] = (b[j] - low[j, :j] @ y[:j]) / low[j, j]
    x = np.zeros(m)
    for j in range(m - 1, -1, -1):
        x[j] = (y[j] - low[j + 1:, j] @ x[j + 1:]) / low[j, j]
    return x
