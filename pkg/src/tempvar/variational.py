"""The integral functional ``J(u) = int L(u, CD u, t) dt`` and its first variation.

The functional is discretised first (trapezoidal rule on the grid) and then
minimised; the Euler-Lagrange residual is an independent diagnostic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import operators as ops
from .fnspace import SpaceElement, basis, norm
from .grid import GridFunction, TemperedParams
from .identities import integral_bound_constant, trapezoid_weights
from .lagrangian import LagrangianSpec

__all__ = [
    "evaluate",
    "gateaux_derivative",
    "euclidean_gradient",
    "gradient",
    "grad_norm",
    "el_residual",
    "ConditionResult",
    "validate_hypotheses",
    "default_sample",
    "coercivity_bound",
    "SolveReport",
    "minimize_direct",
]


def _trajectory(u):
    """Node values, Caputo derivative and nodes of a SpaceElement or GridFunction."""
    if isinstance(u, SpaceElement):
        return u.values, u.caputo.values, u.t, u.u.h
    u.check_finite()
    return u.values, ops.left_caputo_derivative(u).values, u.t, u.h


def evaluate(lag: LagrangianSpec, u) -> float:
    """Trapezoidal approximation of ``int_a^b L(u, CD u, t) dt``.

    Accepts a :class:`SpaceElement` or any finite :class:`GridFunction`
    (trajectories that do not vanish at the endpoints are allowed here).
    """
    x, y, t, h = _trajectory(u)
    return float(trapezoid_weights(x.size - 1, h) @ lag(x, y, t))


def gateaux_derivative(lag: LagrangianSpec, u: SpaceElement, v: SpaceElement) -> float:
    """``int Lx v + Ly CD v``, linear in ``v``."""
    if u.n != v.n or u.params != v.params:
        raise ValueError("u and v live on different grids")
    x, y, t, h = _trajectory(u)
    w = trapezoid_weights(u.n, h)
    return float(w @ (lag.dx(x, y, t) * v.values) + w @ (lag.dy(x, y, t) * v.caputo.values))


def euclidean_gradient(lag: LagrangianSpec, u: SpaceElement) -> np.ndarray:
    """Derivative of ``J`` with respect to the interior nodal values."""
    x, y, t, h = _trajectory(u)
    b = basis(u.params, u.n)
    w = b.weights
    return (w * lag.dx(x, y, t))[1:-1] + b.derivative.T @ (w * lag.dy(x, y, t))


def gradient(lag: LagrangianSpec, u: SpaceElement) -> SpaceElement:
    """Riesz representative ``g`` of the Gateaux derivative.

    ``inner_product(g, v) == gateaux_derivative(lag, u, v)`` for every ``v``
    in the span of the hat basis.
    """
    b = basis(u.params, u.n)
    return b.element(b.riesz(euclidean_gradient(lag, u)))


def grad_norm(lag: LagrangianSpec, u: SpaceElement) -> float:
    """Dual norm of the Gateaux derivative (the space norm of :func:`gradient`)."""
    d = euclidean_gradient(lag, u)
    g = basis(u.params, u.n).riesz(d)
    return math.sqrt(max(float(d @ g), 0.0))


def el_residual(lag: LagrangianSpec, u) -> float:
    """Discrete L2 norm of ``Lx + D_{b-}(Ly)`` over the interior nodes.

    ``D_{b-}`` is the right tempered Riemann-Liouville derivative; the two
    endpoint nodes, where it may diverge, are left out.
    """
    x, y, t, h = _trajectory(u)
    params = u.params
    p = GridFunction(params, lag.dy(x, y, t))
    r = lag.dx(x, y, t) + ops.right_rl_derivative(p).values
    return math.sqrt(h * float(np.sum(r[1:-1] ** 2)))


# -- hypothesis falsification ------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    """Outcome of sampling one inequality: ``status`` is passed, failed or skipped."""

    condition: str
    status: str
    violations: int = 0
    witness: tuple | None = None
    note: str = ""

    def to_dict(self):
        return {
            "condition": self.condition,
            "status": self.status,
            "violations": self.violations,
            "witness": None if self.witness is None else [float(c) for c in self.witness],
            "note": self.note,
        }


def default_sample(params: TemperedParams, n_points: int = 10_000, box: float = 5.0, seed: int = 0):
    """Low-discrepancy points over ``[-box, box]^2 x [a, b]`` as ``(x, y, t)`` arrays."""
    pts = qmc.Halton(d=3, scramble=True, seed=seed).random(n_points)
    lo = [-box, -box, params.a]
    hi = [box, box, params.b]
    s = qmc.scale(pts, lo, hi)
    return s[:, 0], s[:, 1], s[:, 2]


def _result(name, bad, x, y, t, note=""):
    idx = np.flatnonzero(bad)
    if idx.size == 0:
        return ConditionResult(name, "passed", note=note)
    i = idx[0]
    return ConditionResult(name, "failed", int(idx.size), (x[i], y[i], t[i]), note)


def _tol(*vals):
    return 1e-12 * (1.0 + sum(np.abs(v) for v in vals))


def growth_exponent(fn, x, t, y_scales=(1e3, 1e6)) -> np.ndarray:
    """Apparent power of ``|fn(x, Y, t)|`` in ``Y`` between two large scales (max over signs)."""
    lo, hi = y_scales
    out = np.full(np.shape(x), -np.inf)
    for sgn in (1.0, -1.0):
        a = np.abs(fn(x, sgn * lo, t))
        b = np.abs(fn(x, sgn * hi, t))
        with np.errstate(divide="ignore", invalid="ignore"):
            e = np.where((a > 0) & (b > 0), np.log(b / a) / math.log(hi / lo), -np.inf)
        out = np.maximum(out, e)
    return out


def validate_hypotheses(lag: LagrangianSpec, sample) -> dict:
    """Sample the structural hypotheses of the existence theorem and report violations.

    * growth bounds (L1)-(L3): a condition ``|F| <= r|y|^d + s`` with
      unknown continuous ``r, s`` can only be falsified asymptotically, so the
      apparent growth exponent of ``F`` in ``y`` between ``|y| = 1e3`` and
      ``1e6`` is compared with ``d`` (0.05 allowance);
    * (L4) ``L >= zeta y^2 + c2 |x|^d4 + c3``, pointwise;
    * (L5) midpoint convexity in ``(x, y)`` over pairs of samples sharing ``t``.

    (L1) is tested with ``|y|^d1``; the literal statement bounds by a power
    of ``|t|``, which cannot control growth in ``y``. The report notes this.
    """
    x, y, t = (np.asarray(c, dtype=float) for c in sample)
    g = lag.growth
    out = {}

    def growth_check(name, d, fn, note=""):
        if g is None or d is None:
            out[name] = ConditionResult(name, "skipped", note="exponent not declared")
            return
        e = growth_exponent(fn, x, t)
        bad = e > d + 0.05
        out[name] = _result(name, bad, x, np.full_like(x, 1e6), t, note=note)

    growth_check(
        "L1",
        None if g is None else g.d1,
        lambda xx, yy, tt: lag.L(xx, yy, tt) - lag.L(xx, 0.0 * yy, tt),
        note="tested as |L(x,y,t) - L(x,0,t)| <= r|y|^d1 + s; the stated bound uses |t|^d1",
    )
    growth_check("L2", None if g is None else g.d2, lag.Lx)
    growth_check("L3", None if g is None else g.d3, lag.Ly)

    if g is None or g.zeta is None or g.d4 is None:
        out["L4"] = ConditionResult("L4", "skipped", note="zeta/d4 not declared")
    else:
        lv = lag(x, y, t)
        rhs = g.zeta * y**2 + g.c2 * np.abs(x) ** g.d4 + g.c3
        out["L4"] = _result("L4", lv < rhs - _tol(lv, rhs), x, y, t)

    out["L5"] = _midpoint_convexity("L5", lag, x, y, t, vary_x=True)
    return out


def _midpoint_convexity(name, lag, x, y, t, vary_x):
    """``L(mid) <= (L(p) + L(q)) / 2`` for p, q paired by a fixed permutation, same t."""
    q = np.random.default_rng(12345).permutation(x.size)
    x2 = x[q] if vary_x else x
    y2 = y[q]
    lp, lq = lag(x, y, t), lag(x2, y2, t)
    lm = lag(0.5 * (x + x2), 0.5 * (y + y2), t)
    avg = 0.5 * (lp + lq)
    return _result(name, lm > avg + _tol(lp, lq), x, y, t)


def coercivity_bound(lag: LagrangianSpec, u: SpaceElement) -> dict:
    """Lower bound on ``J(u)`` from the coercivity hypothesis, and the actual value.

    Uses ``||u||_2 <= K ||CD u||_2 <= K ||u||`` with ``K`` the tempered
    integral norm constant, together with ``||CD u||_2^2 >= ||u||^2 / (1 + K^2)``:

    ``lower = zeta ||u||^2 / (1 + K^2) - |c2| (b-a)^(1-d4/2) K^d4 ||u||^d4 - (b-a)|c3|``
    """
    g = lag.growth
    if g is None or g.zeta is None or g.d4 is None:
        raise ValueError("coercivity bound needs growth metadata zeta and d4")
    p = u.params
    k = integral_bound_constant(p)
    nu = norm(u)
    lower = (
        g.zeta * nu**2 / (1.0 + k**2)
        - abs(g.c2) * p.length ** (1.0 - g.d4 / 2.0) * k**g.d4 * nu**g.d4
        - p.length * abs(g.c3)
    )
    actual = evaluate(lag, u)
    return {"lower": lower, "actual": actual, "norm": nu, "holds": actual >= lower - 1e-12 * (1 + abs(actual))}


# -- direct minimisation -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Result of a minimisation or critical-point search."""

    extremal: SpaceElement = field(repr=False)
    value: float
    grad_norm: float
    el_residual: float
    iterations: int
    trace: tuple
    converged: bool
    message: str = ""
    extras: dict = field(default_factory=dict, repr=False)
    path: object = field(default=None, repr=False)

    def to_json(self) -> dict:
        p = self.extremal.params
        d = {
            "value": self.value,
            "grad_norm": self.grad_norm,
            "el_residual": self.el_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "trace": [list(r) for r in self.trace],
            "params": {"alpha": p.alpha, "sigma": p.sigma, "a": p.a, "b": p.b, "n": self.extremal.n},
        }
        d.update(self.extras)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5
MIN_STEP = 1e-12


def minimize_direct(lag: LagrangianSpec, u0: SpaceElement, tol: float = 1e-8, max_iter: int = 500) -> SolveReport:
    """Steepest descent in the space metric with Armijo backtracking.

    Step ``u - tau g`` with ``g`` the Riesz gradient, ``tau`` starting at 1
    and halved until ``J`` drops by at least ``1e-4 * tau * ||g||^2``.
    """
    b = basis(u0.params, u0.n)
    c = b.coefficients(u0)
    u = u0
    value = evaluate(lag, u)
    trace = []
    message = "max_iter reached"
    converged = False
    it = 0
    while True:
        d = euclidean_gradient(lag, u)
        gc = b.riesz(d)
        gn = math.sqrt(max(float(d @ gc), 0.0))
        trace.append((it, value, gn))
        if gn <= tol:
            converged, message = True, "converged"
            break
        if it >= max_iter:
            break
        tau = 1.0
        while True:
            trial_c = c - tau * gc
            trial = b.element(trial_c)
            tv = evaluate(lag, trial)
            if not math.isfinite(tv):
                raise FloatingPointError("non-finite functional value during line search")
            if tv <= value - ARMIJO_C * tau * gn**2:
                break
            tau *= ARMIJO_SHRINK
            if tau < MIN_STEP:
                trial = None
                break
        if trial is None:
            message = "line search failed"
            break
        c, u, value = trial_c, trial, tv
        it += 1
    return SolveReport(
        extremal=u,
        value=value,
        grad_norm=gn,
        el_residual=el_residual(lag, u),
        iterations=it,
        trace=tuple(trace),
        converged=converged,
        message=message,
    )
