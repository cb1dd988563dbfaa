"""Mountain-pass geometry checks and a string method for saddle points.

The search keeps a discrete path of ``m`` knots from ``0`` to ``e``. Each
sweep moves the interior knots by a safeguarded descent step, then
re-spaces them evenly in the space norm. When the peak value stalls, the
peak knot is polished by Newton's method on the gradient (finite-difference
Hessian) to a critical point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .fnspace import SpaceElement, basis, norm, random_smooth_element
from .grid import TemperedParams
from .lagrangian import LagrangianSpec
from .variational import (
    ConditionResult,
    SolveReport,
    _midpoint_convexity,
    _result,
    _tol,
    el_residual,
    euclidean_gradient,
    evaluate,
    growth_exponent,
)

__all__ = [
    "GeometryReport",
    "PathState",
    "verify_geometry",
    "find_critical_point",
    "validate_mp_hypotheses",
]

RING_DIRECTIONS = 64
MAX_SCALE = 1e6


@dataclass(frozen=True, eq=False)
class GeometryReport:
    found: bool
    rho: float
    eta: float
    e: SpaceElement | None = field(repr=False)
    scale: float | None
    value_at_zero: float
    value_at_e: float | None
    message: str

    def to_dict(self):
        return {
            "found": self.found,
            "rho": self.rho,
            "eta": self.eta,
            "scale": self.scale,
            "value_at_zero": self.value_at_zero,
            "value_at_e": self.value_at_e,
            "message": self.message,
        }


def _profile(params: TemperedParams, n: int) -> SpaceElement:
    u = SpaceElement.from_callable(params, n, lambda t: np.sin(np.pi * (t - params.a) / params.length))
    return u * (1.0 / norm(u))


def verify_geometry(lag: LagrangianSpec, params: TemperedParams, n: int, seed: int = 0) -> GeometryReport:
    """Look for a positive ring ``||u|| = rho`` and a far point ``e`` with ``J(e) < 0``.

    ``rho`` is halved from 1 until the minimum of ``J`` over 64 random
    directions (``eta``) is positive. ``e`` is ``lambda u0`` for a fixed
    sine profile ``u0``, doubling ``lambda`` from ``2 rho`` up to 1e6.
    """
    rng = np.random.default_rng(seed)
    j0 = evaluate(lag, SpaceElement.zeros(params, n))
    dirs = []
    for _ in range(RING_DIRECTIONS):
        d = random_smooth_element(params, n, rng)
        dirs.append(d * (1.0 / norm(d)))
    rho, eta = 1.0, -math.inf
    for _ in range(20):
        eta = min(evaluate(lag, d * rho) for d in dirs)
        if eta > j0:
            break
        rho *= 0.5
    if not eta > j0:
        return GeometryReport(False, rho, eta, None, None, j0, None, "geometry not found: no positive ring")
    u0 = _profile(params, n)
    lam = 2.0 * rho
    while lam <= MAX_SCALE:
        try:
            v = evaluate(lag, u0 * lam)
        except FloatingPointError:
            v = -math.inf
        if v < j0:
            if not math.isfinite(v):
                lam *= 0.75
                continue
            return GeometryReport(True, rho, eta, u0 * lam, lam, j0, v, "ok")
        lam *= 2.0
    return GeometryReport(False, rho, eta, None, None, j0, None, "geometry not found: J(lambda u0) >= J(0) up to lambda = 1e6")


@dataclass(frozen=True, eq=False)
class PathState:
    """Knot coefficients (rows) of a discrete path, with values and the peak."""

    params: TemperedParams
    coefficients: np.ndarray = field(repr=False)
    values: np.ndarray

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.values))

    @property
    def knots(self):
        b = basis(self.params, self.coefficients.shape[1] + 1)
        return [b.element(c) for c in self.coefficients]


class _Problem:
    def __init__(self, lag, params, n):
        self.lag = lag
        self.b = basis(params, n)
        self.gram = self.b.gram

    def value(self, c):
        try:
            return evaluate(self.lag, self.b.element(c))
        except FloatingPointError:
            return -math.inf

    def dgrad(self, c):
        return euclidean_gradient(self.lag, self.b.element(c))

    def grad(self, c):
        d = self.dgrad(c)
        g = self.b.riesz(d)
        return g, math.sqrt(max(float(d @ g), 0.0))

    def norm(self, v):
        return math.sqrt(max(float(v @ self.gram @ v), 0.0))

    def hessian(self, c):
        k = c.size
        h = np.empty((k, k))
        eps = 1e-6 * max(1.0, float(np.max(np.abs(c))))
        for j in range(k):
            e = np.zeros(k)
            e[j] = eps
            h[:, j] = (self.dgrad(c + e) - self.dgrad(c - e)) / (2 * eps)
        return 0.5 * (h + h.T)


def _respace(prob, coeffs):
    seg = np.array([prob.norm(coeffs[k + 1] - coeffs[k]) for k in range(len(coeffs) - 1)])
    s = np.concatenate(([0.0], np.cumsum(seg)))
    if s[-1] == 0.0:
        return coeffs
    s /= s[-1]
    target = np.linspace(0.0, 1.0, len(coeffs))
    out = np.empty_like(coeffs)
    for j in range(coeffs.shape[1]):
        out[:, j] = np.interp(target, s, coeffs[:, j])
    out[0], out[-1] = coeffs[0], coeffs[-1]
    return out


def _sweep(prob, coeffs, values, step_cap):
    """One safeguarded descent step per interior knot.

    A knot moves only while above the endpoint level, never below it, by at
    most ``step_cap`` in norm, with Armijo backtracking.
    """
    floor = max(values[0], values[-1])
    new = coeffs.copy()
    for k in range(1, len(coeffs) - 1):
        if values[k] <= floor:
            continue
        g, gn = prob.grad(coeffs[k])
        if gn == 0.0:
            continue
        tau = min(1.0, step_cap / gn)
        while tau > 1e-10:
            trial = coeffs[k] - tau * g
            v = prob.value(trial)
            if floor <= v <= values[k] - 1e-4 * tau * gn**2:
                new[k] = trial
                break
            tau *= 0.5
    return new


def find_critical_point(
    lag: LagrangianSpec,
    e: SpaceElement,
    m: int = 17,
    tol: float = 1e-4,
    max_iter: int = 300,
    *,
    seed: int | None = None,
    perturbation: float = 0.0,
    stall_rtol: float = 1e-5,
    newton_iter: int = 30,
) -> SolveReport:
    """Saddle-type critical point between ``0`` and ``e``.

    With ``seed`` and ``perturbation > 0`` the initial straight path is bent by
    ``perturbation * sin(pi s) * w`` with ``w`` a random smooth element of
    unit norm. The peak value is nonincreasing over the string sweeps: a sweep
    that would raise it is rejected and the step cap halved.

    ``extras`` in the report holds ``path_values``, ``peak_trace``,
    ``string_iterations`` and ``morse_index`` (negative eigenvalues of the
    Hessian at the result).
    """
    if m < 8:
        raise ValueError("need at least 8 knots")
    params, n = e.params, e.n
    prob = _Problem(lag, params, n)
    s = np.linspace(0.0, 1.0, m)
    coeffs = np.outer(s, e.interior)
    if perturbation and seed is not None:
        w = random_smooth_element(params, n, np.random.default_rng(seed))
        w = w.interior / norm(w)
        coeffs[1:-1] += perturbation * np.sin(np.pi * s[1:-1])[:, None] * w[None, :]
    values = np.array([prob.value(c) for c in coeffs])
    spacing = prob.norm(coeffs[1] - coeffs[0])
    step_cap = spacing
    trace = []
    peak_trace = [float(values.max())]
    it = 0
    k = int(np.argmax(values))
    _, gn = prob.grad(coeffs[k])
    trace.append((0, float(values[k]), gn))
    while gn > tol and it < max_iter:
        new = _respace(prob, _sweep(prob, coeffs, values, step_cap))
        nv = np.array([prob.value(c) for c in new])
        it += 1
        if nv.max() > values.max():
            step_cap *= 0.5
            trace.append((it, float(values.max()), gn))
            if step_cap < 1e-8 * spacing:
                break
            continue
        coeffs, values = new, nv
        k = int(np.argmax(values))
        _, gn = prob.grad(coeffs[k])
        trace.append((it, float(values[k]), gn))
        peak_trace.append(float(values[k]))
        if len(peak_trace) > 10 and peak_trace[-11] - peak_trace[-1] <= stall_rtol * abs(peak_trace[-1]):
            break
    string_iters = it
    c = coeffs[k].copy()
    message = "converged" if gn <= tol else "max_iter reached"
    hess = None
    for _ in range(newton_iter):
        if gn <= tol:
            break
        hess = prob.hessian(c)
        try:
            delta = np.linalg.solve(hess, -prob.dgrad(c))
        except np.linalg.LinAlgError:
            message = "singular Hessian in Newton refinement"
            break
        lam = 1.0
        while lam > 1e-4:
            trial = c + lam * delta
            _, tgn = prob.grad(trial)
            if tgn < gn:
                break
            lam *= 0.5
        else:
            message = "Newton refinement stalled"
            break
        c, gn = trial, tgn
        it += 1
        trace.append((it, prob.value(c), gn))
    if gn <= tol:
        message = "converged"
    if hess is None:
        hess = prob.hessian(c)
    morse = int(np.sum(scipy.linalg.eigh(hess, prob.gram, eigvals_only=True) < 0))
    u = prob.b.element(c)
    value = evaluate(lag, u)
    return SolveReport(
        extremal=u,
        value=value,
        grad_norm=gn,
        el_residual=el_residual(lag, u),
        iterations=it,
        trace=tuple(trace),
        converged=gn <= tol,
        message=message,
        extras={
            "critical_value": value,
            "path_values": [float(v) for v in values],
            "peak_trace": peak_trace,
            "string_iterations": string_iters,
            "morse_index": morse,
            "knots": m,
        },
        path=PathState(params, coeffs, values),
    )


# -- hypotheses -------------------------------------------------------------


def validate_mp_hypotheses(lag: LagrangianSpec, sample, mu_L: float | None = None, Lambda: float | None = None) -> dict:
    """Sample the mountain-pass hypotheses and report violations with witnesses.

    ``mu_L`` and ``Lambda`` default to the Lagrangian's growth metadata.
    Checks: (M1) midpoint convexity in ``y``; (M2) growth of ``L`` and ``Lx``
    at most quadratic and of ``Ly`` at most linear in ``y``; (M3)
    ``Lx x + Ly y <= mu_L L``; (M4) ``L >= Lambda y^2``; (M5) ``L(x, 0, t) = 0``;
    and the scaling consequence ``L(lx, ly, t) <= l^mu_L L(x, y, t)`` for
    ``l`` in {2, 4, 8}.
    """
    x, y, t = (np.asarray(c, dtype=float) for c in sample)
    g = lag.growth
    mu = mu_L if mu_L is not None else (g.mu_L if g else None)
    lam = Lambda if Lambda is not None else (g.Lambda if g else None)
    out = {"M1": _midpoint_convexity("M1", lag, x, y, t, vary_x=False)}

    worst = np.maximum(growth_exponent(lag.L, x, t) - 2.0, growth_exponent(lag.Lx, x, t) - 2.0)
    worst = np.maximum(worst, growth_exponent(lag.Ly, x, t) - 1.0)
    out["M2"] = _result("M2", worst > 0.05, x, y, t, note="asymptotic growth in y")

    lv = lag(x, y, t)
    if mu is None:
        out["M3"] = ConditionResult("M3", "skipped", note="mu_L not declared")
        out["Mlm1"] = ConditionResult("Mlm1", "skipped", note="mu_L not declared")
    else:
        lhs = lag.dx(x, y, t) * x + lag.dy(x, y, t) * y
        out["M3"] = _result("M3", lhs > mu * lv + _tol(lhs, lv), x, y, t)
        bad = np.zeros(x.shape, dtype=bool)
        for s in (2.0, 4.0, 8.0):
            ls = lag(s * x, s * y, t)
            bad |= ls > s**mu * lv + _tol(ls, s**mu * lv)
        out["Mlm1"] = _result("Mlm1", bad, x, y, t)
    if lam is None:
        out["M4"] = ConditionResult("M4", "skipped", note="Lambda not declared")
    else:
        rhs = lam * y**2
        out["M4"] = _result("M4", lv < rhs - _tol(lv, rhs), x, y, t)
    l0 = lag(x, np.zeros_like(y), t)
    out["M5"] = _result("M5", np.abs(l0) > _tol(l0), x, y, t)
    if mu is not None and lam is not None:
        out["tension"] = ConditionResult(
            "tension",
            "noted",
            note="M3 with M4 forces Lambda l^2 y^2 <= l^mu_L L for every l > 1, impossible for y != 0 when mu_L < 2",
        )
    return out
