"""Lagrangians ``L(x, y, t)`` with their partial derivatives and growth data.

``x`` is the state, ``y`` the tempered Caputo derivative of the state and
``t`` time. All callables are vectorised over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import parse
from .grid import GridFunction

__all__ = [
    "Growth",
    "LagrangianSpec",
    "CATALOG",
    "from_catalog",
    "from_expression",
    "dirichlet",
    "linear_forced",
    "double_well",
    "power",
    "forcing_callable",
]

Fn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Growth:
    """Constants of the structural hypotheses, as declared by the caller.

    The lower bound reads ``L >= zeta |y|^2 + c2 |x|^d4 + c3`` with constant
    ``c2``, ``c3``. ``None`` means "not declared"; checks needing a missing
    constant are skipped.
    """

    d1: float | None = None
    d2: float | None = None
    d3: float | None = None
    d4: float | None = None
    zeta: float | None = None
    c2: float = 0.0
    c3: float = 0.0
    mu_L: float | None = None
    Lambda: float | None = None

    def __post_init__(self):
        def check(name, lo, hi, lo_open=True, hi_open=False):
            v = getattr(self, name)
            if v is None:
                return
            ok_lo = v > lo if lo_open else v >= lo
            ok_hi = v < hi if hi_open else v <= hi
            if not (ok_lo and ok_hi):
                raise ValueError(f"growth constant {name}={v} out of range")

        check("d1", 0, 2)
        check("d2", 0, 2)
        check("d3", 0, 1)
        check("d4", 1, 2, lo_open=False, hi_open=True)
        check("zeta", 0, math.inf)
        check("mu_L", 0, 2, hi_open=True)
        check("Lambda", 0, math.inf)


@dataclass(frozen=True)
class LagrangianSpec:
    """A C^1 Lagrangian with partial derivatives ``Lx`` and ``Ly``."""

    L: Fn
    Lx: Fn
    Ly: Fn
    growth: Growth | None = None
    name: str = "custom"
    x_independent: bool = field(default=False)

    def __call__(self, x, y, t):
        return _finite(self.L(x, y, t), "L")

    def dx(self, x, y, t):
        return _finite(self.Lx(x, y, t), "Lx")

    def dy(self, x, y, t):
        return _finite(self.Ly(x, y, t), "Ly")

    def consistency_error(self, samples, step: float = 1e-6) -> float:
        """Largest relative gap between ``Lx``/``Ly`` and central differences of ``L``."""
        x, y, t = (np.asarray(c, dtype=float) for c in samples)
        worst = 0.0
        for exact, dxv, dyv in ((self.Lx, 1.0, 0.0), (self.Ly, 0.0, 1.0)):
            hx = step * max(1.0, float(np.max(np.abs(x))))
            hy = step * max(1.0, float(np.max(np.abs(y))))
            hh = hx * dxv + hy * dyv
            fd = (self.L(x + hx * dxv, y + hy * dyv, t) - self.L(x - hx * dxv, y - hy * dyv, t)) / (2 * hh)
            ex = exact(x, y, t)
            scale = np.maximum(np.maximum(np.abs(ex), np.abs(fd)), 1.0)
            worst = max(worst, float(np.max(np.abs(ex - fd) / scale)))
        return worst

    def check_consistency(self, samples, rtol: float = 1e-5):
        err = self.consistency_error(samples)
        if not err <= rtol:
            raise ValueError(f"Lagrangian {self.name!r}: partial derivatives disagree with finite differences (rel err {err:.3g})")


def _finite(v, what):
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise FloatingPointError(f"{what} produced non-finite values")
    return v


def _zeros_like(x, y, t):
    return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(t)))


def forcing_callable(f):
    """Turn a number, callable of ``t`` or :class:`GridFunction` into a callable of ``t``."""
    if isinstance(f, GridFunction):
        tn, vals = f.t, np.array(f.values)
        return lambda t: np.interp(t, tn, vals)
    if callable(f):
        return f
    c = float(f)
    return lambda t: np.full(np.shape(t), c)


def dirichlet() -> LagrangianSpec:
    """``L = y^2 / 2``."""
    return LagrangianSpec(
        L=lambda x, y, t: 0.5 * np.asarray(y) ** 2 + 0.0 * np.asarray(x),
        Lx=_zeros_like,
        Ly=lambda x, y, t: np.asarray(y, dtype=float) + 0.0 * np.asarray(x),
        growth=Growth(d1=2, d2=1, d3=1, d4=1, zeta=0.5, c2=0.0, c3=0.0, Lambda=0.5),
        name="dirichlet",
        x_independent=True,
    )


def linear_forced(f, zero_order: bool = True) -> LagrangianSpec:
    """``L = y^2/2 + x^2/2 - f(t) x``; ``zero_order=False`` drops the ``x^2/2`` term."""
    fc = forcing_callable(f)
    k = 1.0 if zero_order else 0.0
    fsup = None
    if isinstance(f, GridFunction):
        fsup = float(np.max(np.abs(f.values)))
    # x^2/2 - f x >= -f^2/2 completes the square; without it c2 = -|f| with d4 = 1
    growth = None
    if fsup is not None:
        growth = (
            Growth(d1=2, d2=1, d3=1, d4=1, zeta=0.5, c2=0.0, c3=-0.5 * fsup**2)
            if zero_order
            else Growth(d1=2, d2=1, d3=1, d4=1, zeta=0.5, c2=-fsup, c3=0.0)
        )
    return LagrangianSpec(
        L=lambda x, y, t: 0.5 * np.asarray(y) ** 2 + 0.5 * k * np.asarray(x) ** 2 - fc(t) * x,
        Lx=lambda x, y, t: k * np.asarray(x) - fc(t) + 0.0 * np.asarray(y),
        Ly=lambda x, y, t: np.asarray(y, dtype=float) + 0.0 * np.asarray(x),
        growth=growth,
        name="linear-forced" if zero_order else "linear-forced-no-mass",
    )


def double_well() -> LagrangianSpec:
    """``L = y^2/2 + (x^2 - 1)^2 / 4``."""
    return LagrangianSpec(
        L=lambda x, y, t: 0.5 * np.asarray(y) ** 2 + 0.25 * (np.asarray(x) ** 2 - 1.0) ** 2,
        Lx=lambda x, y, t: np.asarray(x) ** 3 - np.asarray(x) + 0.0 * np.asarray(y),
        Ly=lambda x, y, t: np.asarray(y, dtype=float) + 0.0 * np.asarray(x),
        growth=Growth(d1=2, d2=1, d3=1, d4=1, zeta=0.5, c2=0.0, c3=0.0),
        name="double-well",
    )


def power(p: float = 4.0) -> LagrangianSpec:
    """``L = y^2/2 - |x|^p / p``, the model mountain-pass Lagrangian."""
    if not p > 1.0:
        raise ValueError("power Lagrangian needs p > 1")
    return LagrangianSpec(
        L=lambda x, y, t: 0.5 * np.asarray(y) ** 2 - np.abs(x) ** p / p,
        Lx=lambda x, y, t: -np.abs(x) ** (p - 1.0) * np.sign(x) + 0.0 * np.asarray(y),
        Ly=lambda x, y, t: np.asarray(y, dtype=float) + 0.0 * np.asarray(x),
        growth=Growth(d1=2, d3=1),
        name=f"power(p={p:g})",
    )


CATALOG = {
    "dirichlet": dirichlet,
    "linear-forced": linear_forced,
    "double-well": double_well,
    "power": power,
}


def from_catalog(name: str, *, f=None, p: float = 4.0) -> LagrangianSpec:
    if name not in CATALOG:
        raise KeyError(f"unknown Lagrangian {name!r}; choose from {', '.join(CATALOG)}")
    if name == "linear-forced":
        if f is None:
            raise ValueError("linear-forced needs a forcing term f")
        return linear_forced(f)
    if name == "power":
        return power(p)
    return CATALOG[name]()


def from_expression(text: str, growth: Growth | None = None) -> LagrangianSpec:
    """Build a Lagrangian from an expression in ``x``, ``y``, ``t``; partials are symbolic."""
    e = parse(text, ("x", "y", "t"))
    ex, ey = e.diff("x"), e.diff("y")

    def wrap(expr):
        return lambda x, y, t: expr(x=x, y=y, t=t)

    return LagrangianSpec(
        L=wrap(e),
        Lx=wrap(ex),
        Ly=wrap(ey),
        growth=growth,
        name=text,
        x_independent=not e.depends_on("x"),
    )
