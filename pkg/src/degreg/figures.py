"""Diagnostic figures rendered next to the delimited output.

Each subcommand gets one PNG summarizing its table; file names derive
from the output path stem.  Rendering is optional and headless.
"""
from __future__ import annotations

import math
import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["render"]


def _finite(rows: Sequence[dict], key: str) -> list[float]:
    out = []
    for row in rows:
        v = row.get(key)
        if isinstance(v, (int, float)) and math.isfinite(v):
            out.append(float(v))
    return out


def _save(fig, out_path: str, suffix: str) -> str:
    stem, _ = os.path.splitext(out_path)
    path = f"{stem}_{suffix}.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def _render_rate(rows: Sequence[dict], out_path: str) -> list[str]:
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(ns, [r["r_n"] for r in rows], "o-", label="exact r_n")
    closed = [(n, r["closed_form"]) for n, r in zip(ns, rows)
              if r["closed_form"] is not None]
    if closed:
        ax.loglog([c[0] for c in closed], [c[1] for c in closed], "s--",
                  label="asymptotic equivalent")
    exps = _finite(rows, "exponent")
    if exps:
        ax.set_title(f"rate vs n (exponent {exps[0]:+.4f})")
    ax.set_xlabel("n")
    ax.set_ylabel("r_n")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return [_save(fig, out_path, "rate")]


def _render_risk(rows: Sequence[dict], out_path: str) -> list[str]:
    ns = [r["n"] for r in rows]
    risks = [r["mean_risk"] for r in rows]
    errs = [r["std_err"] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(ns, risks, yerr=errs, fmt="o-", capsize=3)
    if all(v > 0 for v in risks):
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("mean risk")
    ax.set_title("Monte Carlo risk vs n")
    ax.grid(True, which="both", alpha=0.3)
    return [_save(fig, out_path, "risk")]


def _render_concentration(rows: Sequence[dict], out_path: str) -> list[str]:
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    labels, emp, bound = [], [], []
    for r in rows:
        eps = r["epsilon"]
        eps_part = (f" eps={eps:g}" if isinstance(eps, float)
                    and math.isfinite(eps) else "")
        labels.append(f"n={r['n']}{eps_part}")
        emp.append(r["empirical"])
        bound.append(r["bound"] if r["bound"] is not None else math.nan)
    x = range(len(labels))
    ax.bar(x, emp, width=0.6, label="empirical", color="#4477aa")
    if any(math.isfinite(b) for b in bound):
        ax.plot(x, bound, "r_", markersize=18, label="bound")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    which = rows[0]["which"] if rows else "concentration"
    ax.set_title(f"{which}: empirical vs bound")
    ax.legend()
    fig.tight_layout()
    return [_save(fig, out_path, "concentration")]


def _render_lowerbound(rows: Sequence[dict], out_path: str) -> list[str]:
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ns, [r["risk_max"] for r in rows], "o-", label="max risk")
    ax.plot(ns, [r["certificate"] for r in rows], "s--",
            label="certificate")
    if all(r["risk_max"] > 0 and r["certificate"] > 0 for r in rows):
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("risk")
    ax.set_title("adaptive risk vs lower-bound certificate")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return [_save(fig, out_path, "lowerbound")]


_RENDERERS = {
    "rate": _render_rate,
    "risk": _render_risk,
    "concentration": _render_concentration,
    "lowerbound": _render_lowerbound,
}


def render(command: str, rows: Sequence[dict], out_path: str) -> list[str]:
    """Render the figure(s) for one subcommand; returns written paths."""
    renderer = _RENDERERS.get(command)
    if renderer is None or not rows:
        return []
    return renderer(rows, out_path)
