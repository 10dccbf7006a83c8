"""Local polynomial point estimation with a guarded normal-equation solve.

The fitted system is regularized by adding sqrt(N) to the diagonal
whenever the smallest eigenvalue dips to sqrt(N) or below, which keeps
the solve well posed on any sample.  Bandwidths are fixed, balanced
against the shape integral, or selected from the data by the
order-statistics rule implemented here.  Also: the windowed-average
(regressogram) estimator, a two-window shell estimator for rapidly
decaying designs, and empirical kernel-moment statistics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import Kernel
from .linalg import jacobi_smallest_eig, solve_spd
from .rv_math import DomainError, invert_power_log

__all__ = [
    "Modulus",
    "LocalPolyFit",
    "EmptyWindowError",
    "build_system",
    "corrected_solve",
    "select_bandwidth",
    "estimate_at",
    "estimate_adaptive",
    "regressogram",
    "gamma_two_window",
    "kernel_moment_stat",
]


class EmptyWindowError(ValueError):
    """A statistic that needs in-window observations got none."""


@dataclass(frozen=True)
class Modulus:
    """Local approximation modulus omega(h) = r h^s (log 1/h)^log_power.

    The polynomial degree attached to smoothness s is the largest
    integer strictly smaller than s, so s ranges over (degree, degree+1].
    """

    r: float
    s: float
    log_power: float = 0.0

    def __post_init__(self):
        if self.r <= 0.0 or self.s <= 0.0:
            raise ValueError("modulus requires r > 0 and s > 0")

    @property
    def degree(self) -> int:
        return int(math.ceil(self.s)) - 1

    @property
    def monotone_cap(self) -> float:
        """omega is increasing on (0, monotone_cap]."""
        if self.log_power <= 0.0:
            return 1.0
        return min(1.0, math.exp(-self.log_power / self.s))

    def omega(self, h):
        h = np.asarray(h, dtype=float)
        out = self.r * h ** self.s
        if self.log_power != 0.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(h > 0.0,
                               out * np.log(1.0 / np.where(h > 0.0, h, 0.5))
                               ** self.log_power,
                               0.0)
        return out if out.ndim else float(out)

    def omega_inv(self, y: float) -> float:
        """Smallest h with omega(h) = y on the increasing branch.

        Returns inf when y exceeds the attainable maximum.
        """
        if y <= 0.0:
            return 0.0
        x = y / self.r
        if self.log_power == 0.0:
            h = x ** (1.0 / self.s)
            return h if h <= 1.0 else math.inf
        try:
            h = invert_power_log(self.s, self.log_power, x)
        except DomainError:
            return math.inf
        return h if h <= self.monotone_cap + 1e-15 else math.inf

    def omega_inv_vec(self, ys: np.ndarray) -> np.ndarray:
        """Vectorized omega_inv (bisection when a log term is present)."""
        ys = np.asarray(ys, dtype=float)
        if self.log_power == 0.0:
            with np.errstate(over="ignore"):
                h = (ys / self.r) ** (1.0 / self.s)
            return np.where(h <= 1.0, h, np.inf)
        cap = self.monotone_cap
        top = self.omega(cap)
        lo = np.zeros_like(ys)
        hi = np.full_like(ys, cap)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self.omega(mid) < ys
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        return np.where(ys > top, np.inf, out)


@dataclass(frozen=True)
class LocalPolyFit:
    """Solved local fit at one point."""

    theta_hat: np.ndarray
    estimate: float
    n_in_window: int
    lambda_min: float          # smallest eigenvalue of the N-normalized matrix
    corrected: bool
    omega_event: bool
    bandwidth_used: float


def build_system(xs: np.ndarray, ys: np.ndarray, x0: float, h: float,
                 kernel: Kernel, k: int):
    """Weighted normal-equation system of the degree-k local fit.

    Returns (X, Y, N): the (k+1)x(k+1) moment matrix with entries
    sum_i phi_j(X_i) phi_l(X_i) K((X_i-x0)/h) for phi_j(x) = ((x-x0)/h)^j,
    the matching right-hand side, and the count of observations with
    |X_i - x0| <= h (closed interval).  An empty window yields zeros.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if h < 0.0:
        raise ValueError("bandwidth must be nonnegative")
    if h == 0.0:
        mask = xs == x0
        d = np.zeros(int(np.count_nonzero(mask)))
    else:
        mask = np.abs(xs - x0) <= h
        d = (xs[mask] - x0) / h
    nwin = int(np.count_nonzero(mask))
    m = k + 1
    mat = np.zeros((m, m))
    vec = np.zeros(m)
    if nwin == 0:
        return mat, vec, 0
    w = kernel(d)
    yw = ys[mask] * w
    moments = np.empty(2 * k + 1)
    p = np.ones_like(d)
    for t in range(2 * k + 1):
        moments[t] = np.sum(w * p)
        if t < 2 * k:
            p = p * d
    p = np.ones_like(d)
    for j in range(m):
        vec[j] = np.sum(yw * p)
        if j < k:
            p = p * d
    for j in range(m):
        for l in range(m):
            mat[j, l] = moments[j + l]
    return mat, vec, nwin


def corrected_solve(mat: np.ndarray, vec: np.ndarray, nwin: int,
                    bandwidth_used: float) -> LocalPolyFit:
    """Solve the local system, regularizing when it is near-singular.

    With N observations in the window: if the smallest eigenvalue of the
    raw matrix is <= sqrt(N), solve with sqrt(N) added to the diagonal
    and flag the fit as corrected.  The recorded lambda_min is the
    smallest eigenvalue of the N-normalized matrix, and omega_event
    holds when that eigenvalue clears 1/sqrt(N) with N > 0.
    """
    m = len(vec)
    if nwin == 0:
        return LocalPolyFit(theta_hat=np.zeros(m), estimate=0.0,
                            n_in_window=0, lambda_min=0.0, corrected=False,
                            omega_event=False, bandwidth_used=bandwidth_used)
    lam_raw = jacobi_smallest_eig(mat)
    sqn = math.sqrt(nwin)
    corrected = lam_raw <= sqn
    a = mat + sqn * np.eye(m) if corrected else mat
    theta = solve_spd(a, vec)
    lam_norm = lam_raw / nwin
    omega_event = (lam_norm > nwin ** -0.5) and nwin > 0
    return LocalPolyFit(theta_hat=theta, estimate=float(theta[0]),
                        n_in_window=nwin, lambda_min=lam_norm,
                        corrected=corrected, omega_event=omega_event,
                        bandwidth_used=bandwidth_used)


def select_bandwidth(xs: np.ndarray, x0: float, modulus: Modulus,
                     sigma: float) -> float:
    """Smallest h in (0, 1] with omega(h) >= sigma / sqrt(N_h).

    Computed exactly on the order statistics d_(1) <= ... <= d_(n) of
    |X_i - x0|: the infimum is min over feasible i of
    max(d_(i), omega_inv(sigma/sqrt(i))), where i is feasible when
    omega_inv(sigma/sqrt(i)) < d_(i+1) or i = n.  Returns 1.0 when no
    h <= 1 qualifies.
    """
    d = np.sort(np.abs(np.asarray(xs, dtype=float) - x0))
    n = d.size
    if n == 0:
        raise ValueError("select_bandwidth needs at least one observation")
    if sigma == 0.0:
        return float(min(d[0], 1.0))
    targets = sigma / np.sqrt(np.arange(1, n + 1, dtype=float))
    wi = modulus.omega_inv_vec(targets)
    feasible = np.empty(n, dtype=bool)
    feasible[:-1] = wi[:-1] < d[1:]
    feasible[-1] = True
    cand = np.maximum(d, wi)
    cand[~feasible] = np.inf
    best = float(cand.min())
    return best if best <= 1.0 else 1.0


def estimate_at(xs, ys, x0: float, h: float, kernel: Kernel,
                k: int) -> LocalPolyFit:
    """Degree-k local fit at a given bandwidth."""
    mat, vec, nwin = build_system(xs, ys, x0, h, kernel, k)
    return corrected_solve(mat, vec, nwin, bandwidth_used=float(h))


def estimate_adaptive(xs, ys, x0: float, modulus: Modulus, sigma: float,
                      kernel: Kernel) -> LocalPolyFit:
    """Local fit at the data-driven bandwidth; degree from the modulus."""
    h = select_bandwidth(xs, x0, modulus, sigma)
    return estimate_at(xs, ys, x0, h, kernel, modulus.degree)


def regressogram(xs, ys, x0: float, h: float) -> float:
    """Mean response over the closed window |X - x0| <= h; 0 if empty."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    mask = np.abs(xs - x0) <= h
    nwin = int(np.count_nonzero(mask))
    if nwin == 0:
        return 0.0
    return float(np.sum(ys[mask]) / nwin)


def gamma_two_window(xs, ys, x0: float, h: float, aux: float,
                     kernel: Kernel) -> float:
    """Weighted average over two kernel shells at distance h from x0.

    Weights K((X-x0-h)/aux) + K((X-x0+h)/aux) concentrate on the bands
    where a rapidly decaying design actually carries mass; returns 0
    when the total weight vanishes.
    """
    if h <= 0.0 or aux <= 0.0:
        raise ValueError("h and aux must be positive")
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    t = xs - x0
    w = kernel((t - h) / aux) + kernel((t + h) / aux)
    den = float(np.sum(w))
    if den == 0.0:
        return 0.0
    return float(np.sum(w * ys) / den)


def kernel_moment_stat(xs, x0: float, h: float, kernel: Kernel,
                       alpha: int) -> float:
    """Empirical kernel moment (1/N) sum of ((X-x0)/h)^alpha K((X-x0)/h)."""
    xs = np.asarray(xs, dtype=float)
    mask = np.abs(xs - x0) <= h
    nwin = int(np.count_nonzero(mask))
    if nwin == 0:
        raise EmptyWindowError("no observations within the window")
    d = (xs[mask] - x0) / h
    return float(np.sum(d ** alpha * kernel(d)) / nwin)
