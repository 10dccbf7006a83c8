"""Numerics for regularly varying and rapidly decaying shape functions.

Evaluation, exact primitives, generalized inverses and the Lambert W
function used to invert power-log rate equations in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

__all__ = [
    "DomainError",
    "QuadratureError",
    "NonIntegrableError",
    "upper_gamma",
    "lambert_w0",
    "lambert_wm1",
    "lambert_w0_exp",
    "generalized_inverse",
    "invert_power_log",
    "invert_power_log_asymptotic",
    "karamata_ratio_check",
    "integrate_shape",
    "RegVarFn",
    "GammaVarFn",
    "Primitive",
]

_INV_E = math.exp(-1.0)


class DomainError(ValueError):
    """Argument outside the mathematical domain of the operation."""


class QuadratureError(RuntimeError):
    """The adaptive integrator failed to converge."""


class NonIntegrableError(ValueError):
    """The requested shape has a divergent integral."""


# ---------------------------------------------------------------------------
# incomplete gamma machinery
# ---------------------------------------------------------------------------

def upper_gamma(s: float, x):
    """Upper incomplete gamma function Gamma(s, x) for real ``s`` of any sign.

    For s > 0 this is ``gammaincc(s, x) * Gamma(s)``; s = 0 is the
    exponential integral E1; negative s is reached by the downward
    recurrence ``Gamma(s, x) = (Gamma(s+1, x) - x^s e^-x) / s``, which is
    cancellation-free because the power term dominates with a fixed sign.

    ``x`` may be a scalar or an ndarray (x >= 0; x > 0 required when
    s <= 0, where the function diverges at the origin).
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0.0):
        raise DomainError("upper_gamma requires x >= 0")
    s = float(s)
    # climb the shape up to (0, 1] (or to exactly 0 for integer s <= 0)
    steps = 0
    s_top = s
    while s_top <= 0.0 and abs(s_top) > 1e-12:
        s_top += 1.0
        steps += 1
    if s <= 0.0 and np.any(arr == 0.0):
        raise DomainError("upper_gamma diverges at x = 0 for s <= 0")
    if abs(s_top) <= 1e-12:
        g = special.exp1(arr)
        s_top = 0.0
    else:
        g = special.gammaincc(s_top, arr) * special.gamma(s_top)
    s_cur = s_top
    expmx = np.exp(-arr) if steps else None
    for _ in range(steps):
        s_cur -= 1.0
        g = (g - arr ** s_cur * expmx) / s_cur
    return float(g[0]) if scalar else g


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------

def _halley(w: float, x: float) -> float:
    # solve w * e^w = x by Halley iteration
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            w += 1e-12
            continue
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        dw = f / denom
        w -= dw
        if abs(dw) <= 5e-17 * max(1.0, abs(w)):
            break
    return w


def _branch_series(p: float) -> float:
    # expansion of W about the branch point w = -1, p = +-sqrt(2(e x + 1))
    return (-1.0 + p - p * p / 3.0 + 11.0 * p ** 3 / 72.0
            - 43.0 * p ** 4 / 540.0 + 769.0 * p ** 5 / 17280.0)


def lambert_w0(x: float) -> float:
    """Principal branch W0: solves w e^w = x for x >= -1/e, w >= -1."""
    x = float(x)
    if x < -_INV_E - 1e-14:
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x}")
    if x == 0.0:
        return 0.0
    if x > 1e80:
        return lambert_w0_exp(math.log(x))
    if x < -_INV_E + 0.04:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = _branch_series(p)
    elif x < 1.0:
        w = x * (1.0 - x)          # series-flavoured seed near 0
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    w = _halley(max(w, -1.0), x)
    return w


def lambert_wm1(x: float) -> float:
    """Secondary branch W-1: solves w e^w = x for x in [-1/e, 0), w <= -1."""
    x = float(x)
    if x < -_INV_E - 1e-14 or x >= 0.0:
        raise DomainError(f"lambert_wm1 requires -1/e <= x < 0, got {x}")
    if x < -_INV_E + 0.04:
        p = -math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = _branch_series(p)
    else:
        # asymptotic seed W-1(x) ~ log(-x) - log(-log(-x)) as x -> 0-
        l1 = math.log(-x)
        w = l1 - math.log(-l1)
    w = _halley(min(w, -1.0), x)
    if w > -1.0:
        w = -1.0
    return w


def lambert_w0_exp(y: float) -> float:
    """W0(e^y) computed without forming e^y (log-domain Newton).

    Solves w + log w = y; safe for arbitrarily large y.
    """
    y = float(y)
    if y <= 1.0:
        return lambert_w0(math.exp(y))
    w = y - math.log(y)
    for _ in range(100):
        step = (w + math.log(w) - y) * w / (w + 1.0)
        w -= step
        if abs(step) <= 5e-17 * w:
            break
    return w


def lambert_wm1_exp(z: float) -> float:
    """W-1(-e^-z) computed without forming e^-z (log-domain Newton).

    Substituting w = -t turns w e^w = -e^-z into t - log t = z with
    t >= 1; safe for arbitrarily large z, where e^-z would underflow.
    """
    z = float(z)
    if z < 1.0:
        raise DomainError(f"lambert_wm1_exp requires z >= 1, got {z}")
    if z <= 700.0:
        return lambert_wm1(-math.exp(-z))
    t = z + math.log(z)
    for _ in range(100):
        step = (t - math.log(t) - z) * t / (t - 1.0)
        t -= step
        if abs(step) <= 5e-17 * t:
            break
    return -t


# ---------------------------------------------------------------------------
# generalized inverse and power-log inversion
# ---------------------------------------------------------------------------

def generalized_inverse(r_fn: Callable[[float], float], y: float,
                        bracket: tuple[float, float]) -> float:
    """Smallest h in ``bracket`` with ``r_fn(h) >= y`` for nondecreasing r_fn.

    Located by bisection to relative width 1e-12.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    rlo, rhi = r_fn(lo), r_fn(hi)
    if y < rlo or y > rhi:
        raise DomainError(
            f"target {y} outside bracket values [{rlo}, {rhi}]")
    if rlo >= y:
        return lo
    span = hi - lo
    for _ in range(200):
        if hi - lo <= 1e-12 * max(abs(hi), abs(lo), 1e-300):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if r_fn(mid) >= y:
            hi = mid
        else:
            lo = mid
    del span
    return hi


def invert_power_log(gamma: float, alpha: float, x: float) -> float:
    """Smallest solution h of h^gamma * (log 1/h)^alpha = x.

    Closed-form Lambert-branch inversion: the secondary branch for
    alpha > 0 (where the map is unimodal with maximum at
    h* = exp(-alpha/gamma)), the principal branch for alpha < 0, and a
    plain power for alpha = 0.
    """
    gamma = float(gamma)
    alpha = float(alpha)
    x = float(x)
    if gamma <= 0.0:
        raise DomainError("invert_power_log requires gamma > 0")
    if x <= 0.0:
        raise DomainError("invert_power_log requires x > 0")
    if alpha == 0.0:
        return x ** (1.0 / gamma)
    if alpha > 0.0:
        # u = -gamma L / alpha satisfies u e^u = -(gamma/alpha) x^(1/alpha)
        log_arg = math.log(gamma / alpha) + math.log(x) / alpha
        if log_arg <= -650.0:
            # x^(1/alpha) would underflow; solve in the log domain instead
            u = lambert_wm1_exp(-log_arg)
            big_l = -alpha * u / gamma
            return math.exp(-big_l)
        arg = -(gamma / alpha) * x ** (1.0 / alpha)
        if arg < -_INV_E - 1e-14:
            cap = (alpha / (gamma * math.e)) ** alpha
            raise DomainError(
                f"no solution: x={x} exceeds the maximum {cap} of the map")
        arg = max(arg, -_INV_E)
        u = lambert_wm1(arg)
        big_l = -alpha * u / gamma
    else:
        # u = gamma L / |alpha| satisfies u e^u = (gamma/|alpha|) x^(-1/|alpha|)
        a = -alpha
        log_arg = math.log(gamma / a) - math.log(x) / a
        u = lambert_w0_exp(log_arg)
        big_l = a * u / gamma
    return math.exp(-big_l)


def invert_power_log_asymptotic(gamma: float, alpha: float, x: float) -> float:
    """Leading-order form of the power-log inverse as x -> 0+.

    h ~ gamma^(alpha/gamma) x^(1/gamma) (log 1/x)^(-alpha/gamma).
    """
    gamma = float(gamma)
    alpha = float(alpha)
    x = float(x)
    big_l = math.log(1.0 / x)
    return gamma ** (alpha / gamma) * x ** (1.0 / gamma) * big_l ** (-alpha / gamma)


# ---------------------------------------------------------------------------
# quadrature utilities
# ---------------------------------------------------------------------------

def integrate_shape(fn: Callable, h: float) -> float:
    """Integral of ``fn`` over (0, h] by adaptive quadrature.

    Substitutes t = h*u so the only possible singularity sits at the
    origin of the unit interval; fails loudly when the integrator does
    not converge within 60 subdivisions.
    """
    h = float(h)
    if h == 0.0:
        return 0.0
    out = integrate.quad(lambda u: fn(h * u), 0.0, 1.0,
                         limit=60, full_output=1)
    value, abserr = out[0], out[1]
    if len(out) > 3:  # explanation message present -> did not converge
        raise QuadratureError(f"shape integral did not converge: {out[3]}")
    if not math.isfinite(value) or abserr > 1e-8 * max(1.0, abs(value)):
        raise QuadratureError(
            f"shape integral unreliable: value={value}, abserr={abserr}")
    return h * value


def karamata_ratio_check(ell: Callable, gamma: float, h: float) -> float:
    """Ratio of the slow-term integral to its regular-variation equivalent.

    Returns ``int_0^h t^gamma ell(t) dt / [(1+gamma)^-1 h^(1+gamma) ell(h)]``,
    which approaches 1 as h -> 0+ for slowly varying ell.
    """
    gamma = float(gamma)
    if gamma <= -1.0:
        raise DomainError("karamata_ratio_check requires gamma > -1")
    h = float(h)
    num = integrate_shape(lambda t: t ** gamma * ell(t), h)
    den = h ** (1.0 + gamma) * ell(h) / (1.0 + gamma)
    return num / den


# ---------------------------------------------------------------------------
# shape-function value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegVarFn:
    """Power-log shape scale * h^index * (log 1/h)^log_power on (0, 1)."""

    scale: float
    index: float
    log_power: float = 0.0

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        out = self.scale * h ** self.index
        if self.log_power != 0.0:
            out = out * np.log(1.0 / h) ** self.log_power
        return out if out.ndim else float(out)

    def primitive(self) -> "Primitive":
        return Primitive.of_regvar(self)


@dataclass(frozen=True)
class GammaVarFn:
    """Rapidly decaying shape exp(-1/h^alpha); faster than any power."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise DomainError("alpha must be positive")

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        out = np.exp(-h ** (-self.alpha))
        return out if out.ndim else float(out)

    def aux(self, h):
        """Auxiliary scale h^(alpha+1)/alpha; o(h) as h -> 0+."""
        h = np.asarray(h, dtype=float)
        out = h ** (self.alpha + 1.0) / self.alpha
        return out if out.ndim else float(out)

    def primitive(self) -> "Primitive":
        return Primitive.of_gammavar(self)


@dataclass(frozen=True)
class Primitive:
    """Exact primitive F(h) = int_0^h source(t) dt of a shape function.

    Closed forms throughout: pure powers directly, power-log shapes via
    the upper incomplete gamma, the index -1 boundary family via the
    log-substitution, rapidly decaying shapes via Gamma(-1/alpha, .).
    """

    source: object
    kind: str
    _eval: Callable = field(repr=False, compare=False)

    @staticmethod
    def of_regvar(fn: RegVarFn) -> "Primitive":
        beta, lp, c = fn.index, fn.log_power, fn.scale
        if beta > -1.0:
            if lp == 0.0:
                def ev(h, beta=beta, c=c):
                    return c * h ** (beta + 1.0) / (beta + 1.0)
                kind = "power"
            else:
                def ev(h, beta=beta, lp=lp, c=c):
                    h = np.asarray(h, dtype=float)
                    out = np.zeros_like(h)
                    pos = h > 0.0
                    arg = (beta + 1.0) * np.log(1.0 / h[pos])
                    vals = upper_gamma(lp + 1.0, arg) / (beta + 1.0) ** (lp + 1.0)
                    out[pos] = c * vals
                    return out
                kind = "power-log"
        elif beta == -1.0:
            if lp >= -1.0:
                raise NonIntegrableError(
                    "index -1 requires log_power < -1 for integrability at 0")
            def ev(h, lp=lp, c=c):
                h = np.asarray(h, dtype=float)
                out = np.zeros_like(h)
                pos = h > 0.0
                big_l = np.log(1.0 / h[pos])
                with np.errstate(divide="ignore"):
                    out[pos] = c * big_l ** (1.0 + lp) / (-1.0 - lp)
                return out
            kind = "boundary"
        else:
            raise NonIntegrableError("index < -1 is not integrable at 0")
        return Primitive(source=fn, kind=kind, _eval=ev)

    @staticmethod
    def of_gammavar(fn: GammaVarFn) -> "Primitive":
        a = fn.alpha

        def ev(h, a=a):
            h = np.asarray(h, dtype=float)
            out = np.zeros_like(h)
            pos = h > 0.0
            # h^(-a) may overflow to inf for tiny h; the tail mass is then 0
            with np.errstate(over="ignore"):
                out[pos] = upper_gamma(-1.0 / a, h[pos] ** (-a)) / a
            return out
        return Primitive(source=fn, kind="rapid", _eval=ev)

    @staticmethod
    def of_callable(f: Callable, source=None) -> "Primitive":
        def ev(h, f=f):
            h = np.asarray(h, dtype=float)
            return np.asarray(f(h), dtype=float)
        return Primitive(source=source, kind="explicit", _eval=ev)

    def __call__(self, h):
        arr = np.asarray(h, dtype=float)
        scalar = arr.ndim == 0
        out = self._eval(np.atleast_1d(arr))
        return float(out[0]) if scalar else out
