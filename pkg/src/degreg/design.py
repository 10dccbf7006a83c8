"""Design density models around an estimation point x0 on [0, 1].

A model is a symmetric density mu(x) = norm_const * nu(|x - x0|) built
from a shape nu that may vanish or explode at x0: power-log shapes,
rapidly decaying shapes, or an explicitly supplied shape integral.
Exact normalization, CDF evaluation, and inverse-CDF sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .rv_math import (GammaVarFn, NonIntegrableError, Primitive, RegVarFn,
                      upper_gamma)

__all__ = [
    "DesignModel",
    "DesignSample",
    "regvar_design",
    "gammavar_design",
    "explicit_design",
    "explicit_power_log_design",
]


@dataclass(frozen=True)
class DesignSample:
    """Reproducible draw of n design points."""

    xs: np.ndarray
    seed: int
    model_id: str


@dataclass(frozen=True)
class DesignModel:
    """Immutable design density; sampling is pure given a seed."""

    kind: str                      # "regvar" | "gammavar" | "explicit_f"
    x0: float
    f_raw: Primitive               # one-sided integral of the raw shape
    window_cap: float              # shape usable on distances (0, window_cap]
    beta: Optional[float] = None
    log_power: Optional[float] = None
    alpha: Optional[float] = None
    norm_const: float = field(init=False, default=0.0)
    left_width: float = field(init=False, default=0.0)
    right_width: float = field(init=False, default=0.0)

    def __post_init__(self):
        if not 0.0 <= self.x0 <= 1.0:
            raise ValueError("x0 must lie in [0, 1]")
        object.__setattr__(self, "left_width", min(self.x0, self.window_cap))
        object.__setattr__(self, "right_width",
                           min(1.0 - self.x0, self.window_cap))
        mass = 0.0
        for w in (self.left_width, self.right_width):
            if w > 0.0:
                mass += float(self.f_raw(w))
        if not math.isfinite(mass) or mass <= 0.0:
            raise NonIntegrableError(
                f"shape mass over [0,1] around x0={self.x0} is {mass}")
        object.__setattr__(self, "norm_const", 1.0 / mass)

    # -- identity ----------------------------------------------------------
    @property
    def model_id(self) -> str:
        bits = [self.kind, f"x0={self.x0!r}"]
        for name in ("beta", "log_power", "alpha"):
            v = getattr(self, name)
            if v is not None:
                bits.append(f"{name}={v!r}")
        return ",".join(bits)

    @property
    def window(self) -> float:
        """Largest symmetric two-sided window radius around x0."""
        return min(self.left_width, self.right_width)

    # -- exact CDF machinery ----------------------------------------------
    def f_nu(self, h) -> float:
        """One-sided integral of the raw (unnormalized) shape at h."""
        arr = np.asarray(h, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > self.window_cap + 1e-12):
            raise ValueError("h outside [0, window_cap]")
        return self.f_raw(h)

    def cdf(self, x):
        """P(X <= x); continuous, nondecreasing, cdf(0)=0, cdf(1)=1."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.any(arr < -1e-12) or np.any(arr > 1.0 + 1e-12):
            raise ValueError("x must lie in [0, 1]")
        a, b, c = self.left_width, self.right_width, self.norm_const
        fa = float(self.f_raw(a)) if a > 0.0 else 0.0
        left = arr <= self.x0
        out = np.empty_like(arr)
        dl = np.clip(self.x0 - arr[left], 0.0, a)
        out[left] = c * (fa - self.f_raw(dl))
        dr = np.clip(arr[~left] - self.x0, 0.0, b)
        out[~left] = c * (fa + self.f_raw(dr))
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if scalar else out

    def expected_count(self, n: int, h: float) -> float:
        """E of the number of the n points within distance h of x0."""
        h = float(h)
        total = 0.0
        for w in (self.left_width, self.right_width):
            if w > 0.0:
                total += float(self.f_raw(min(h, w)))
        return n * self.norm_const * total

    # -- inverse-CDF sampling ---------------------------------------------
    def _invert_distance(self, targets: np.ndarray, side_width: float) -> np.ndarray:
        """Solve f_raw(d) = target for d in [0, side_width], vectorized."""
        if (self.kind == "regvar" and self.log_power == 0.0):
            b1 = self.beta + 1.0
            return (b1 * targets) ** (1.0 / b1)
        lo = np.zeros_like(targets)
        hi = np.full_like(targets, side_width)
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            below = self.f_raw(mid) < targets
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def sample(self, n: int, seed: int) -> DesignSample:
        """n inverse-CDF draws; each draw consumes exactly one uniform."""
        if n < 1:
            raise ValueError("n must be at least 1")
        rng = np.random.Generator(np.random.Philox(seed))
        u = rng.random(n)
        a, b, c = self.left_width, self.right_width, self.norm_const
        fa = float(self.f_raw(a)) if a > 0.0 else 0.0
        fb = float(self.f_raw(b)) if b > 0.0 else 0.0
        q_left = c * fa
        xs = np.empty(n)
        left = u < q_left
        if np.any(left):
            t = fa - u[left] / c
            d = self._invert_distance(np.clip(t, 0.0, fa), a)
            xs[left] = self.x0 - d
        if np.any(~left):
            t = (u[~left] - q_left) / c
            d = self._invert_distance(np.clip(t, 0.0, fb), b)
            xs[~left] = self.x0 + d
        np.clip(xs, 0.0, 1.0, out=xs)
        return DesignSample(xs=xs, seed=int(seed), model_id=self.model_id)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def regvar_design(x0: float, beta: float, log_power: float = 0.0) -> DesignModel:
    """Power-log design shape nu(t) = t^beta (log 1/t)^log_power.

    beta > -1 is integrable for any log power; beta = -1 needs
    log_power < -1. beta < -1 is rejected.
    """
    if beta < -1.0:
        raise NonIntegrableError("beta < -1 is not integrable at the origin")
    shape = RegVarFn(scale=1.0, index=float(beta), log_power=float(log_power))
    prim = Primitive.of_regvar(shape)
    return DesignModel(kind="regvar", x0=float(x0), f_raw=prim,
                       window_cap=1.0, beta=float(beta),
                       log_power=float(log_power))


def gammavar_design(x0: float, alpha: float) -> DesignModel:
    """Rapidly decaying design shape nu(t) = exp(-1/t^alpha)."""
    shape = GammaVarFn(alpha=float(alpha))
    prim = Primitive.of_gammavar(shape)
    return DesignModel(kind="gammavar", x0=float(x0), f_raw=prim,
                       window_cap=1.0, alpha=float(alpha))


def explicit_design(x0: float, f: Callable, *, beta: Optional[float] = None,
                    log_power: Optional[float] = None,
                    window_cap: float = 1.0) -> DesignModel:
    """Design given directly by its one-sided shape integral F.

    F must be increasing on (0, window_cap]; the density is F' there and
    zero beyond.  Optional ``beta``/``log_power`` metadata lets the rate
    machinery recognise the asymptotic family.
    """
    prim = Primitive.of_callable(f)
    return DesignModel(kind="explicit_f", x0=float(x0), f_raw=prim,
                       window_cap=float(window_cap), beta=beta,
                       log_power=log_power)


def explicit_power_log_design(x0: float, beta: float,
                              log_power: float = 0.0) -> DesignModel:
    """Explicit shape integral F(h) = h^(beta+1) (log 1/h)^log_power.

    Monotone only below h* = exp(-log_power/(beta+1)) when the log power
    is positive; the usable window is capped there.
    """
    b1 = beta + 1.0
    if b1 <= 0.0:
        raise NonIntegrableError("explicit power-log form needs beta > -1")
    lp = float(log_power)
    cap = 1.0 if lp <= 0.0 else min(1.0, math.exp(-lp / b1))

    def f(h, b1=b1, lp=lp):
        h = np.asarray(h, dtype=float)
        out = np.zeros_like(h)
        pos = h > 0.0
        hp = h[pos]
        with np.errstate(divide="ignore"):
            val = hp ** b1
            if lp != 0.0:
                val = val * np.log(1.0 / hp) ** lp
        out[pos] = val
        return out

    return DesignModel(kind="explicit_f", x0=float(x0), f_raw=Primitive.of_callable(f),
                       window_cap=cap, beta=float(beta), log_power=lp)
