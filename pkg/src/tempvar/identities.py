"""Numerical checks of the tempered-operator identities and bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import operators as ops
from .grid import GridFunction, TemperedParams
from .specfun import lower_incomplete_gamma

__all__ = [
    "CompositionReport",
    "IntegrationByPartsReport",
    "integral_bound_constant",
    "trapezoid",
    "trapezoid_weights",
    "verify_composition",
    "verify_integration_by_parts",
    "discrete_l2_operator_norm",
    "mirror_defect",
]


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def trapezoid(values, h: float) -> float:
    """Trapezoidal rule; non-finite (singular) nodes contribute zero."""
    v = np.where(np.isfinite(values), values, 0.0)
    return float(trapezoid_weights(v.size - 1, h) @ v)


def integral_bound_constant(params: TemperedParams, order: float | None = None) -> float:
    r"""Norm bound :math:`\gamma(\beta, \sigma(b-a)) / (\sigma^\beta \Gamma(\beta))`.

    For ``sigma < 1e-12`` the analytic limit :math:`(b-a)^\beta / \Gamma(\beta+1)`
    is used.
    """
    beta = params.alpha if order is None else order
    if params.sigma < 1e-12:
        return params.length**beta / math.gamma(beta + 1.0)
    return lower_incomplete_gamma(beta, params.sigma * params.length) / (
        params.sigma**beta * math.gamma(beta)
    )


@dataclass(frozen=True)
class CompositionReport:
    """Max-norm residuals of the composition identities."""

    left_caputo_of_integral: float
    left_integral_of_caputo: float
    right_caputo_of_integral: float
    right_integral_of_caputo: float

    def max(self) -> float:
        return max(asdict(self).values())

    def to_dict(self):
        return asdict(self)


def verify_composition(u: GridFunction) -> CompositionReport:
    """Residuals of ``D I u = u`` and ``I D u = u - e^{-sigma|t - c|} u(c)``, both sides.

    ``c`` is the endpoint the operator starts from (``a`` for left, ``b``
    for right). The first pair is informative for ``u(c) = 0`` only: the L1
    output at the starting node is 0, and for ``u(c) != 0`` the onset of
    ``I u`` near ``c`` leaves an O(1) boundary layer.
    """
    u.check_finite()
    p = u.params
    alpha = p.alpha
    t = u.t
    v = u.values

    def res(x):
        return float(np.max(np.abs(x)))

    left_di = ops.left_caputo_derivative(ops.left_tempered_integral(u, alpha)).values - v
    left_id = ops.left_tempered_integral(ops.left_caputo_derivative(u), alpha).values - (
        v - np.exp(-p.sigma * (t - p.a)) * v[0]
    )
    right_di = ops.right_caputo_derivative(ops.right_tempered_integral(u, alpha)).values - v
    right_id = ops.right_tempered_integral(ops.right_caputo_derivative(u), alpha).values - (
        v - np.exp(-p.sigma * (p.b - t)) * v[-1]
    )
    return CompositionReport(res(left_di), res(left_id), res(right_di), res(right_id))


@dataclass(frozen=True)
class IntegrationByPartsReport:
    derivative_lhs: float
    derivative_rhs: float
    derivative_residual: float
    integral_lhs: float
    integral_rhs: float
    integral_residual: float

    def to_dict(self):
        return asdict(self)


def _rel(x, y):
    scale = max(abs(x), abs(y))
    return abs(x - y) / scale if scale > 0 else 0.0


def verify_integration_by_parts(u: GridFunction, v: GridFunction) -> IntegrationByPartsReport:
    """Relative residuals of the two integration-by-parts formulas.

    Derivative form::

        int u D_{b-} v = u(a) W(a) - u(b) W(b) + int (C D_{a+} u) v,   W = I_{b-}^{1-alpha} v

    Integral form::

        int (I_{a+} u) v = int u (I_{b-} v)

    The right RL derivative is singular at ``b`` when ``v(b) != 0``; that
    node is dropped from the quadrature.
    """
    u.check_finite()
    v.check_finite()
    p = u.params
    h = u.h
    alpha = p.alpha

    drv = ops.right_rl_derivative(v).values
    lhs = trapezoid(u.values * drv, h)
    w = ops.right_tempered_integral(v, 1.0 - alpha, zero_order_identity=True).values
    boundary = u.values[0] * w[0] - u.values[-1] * w[-1]
    rhs = boundary + trapezoid(ops.left_caputo_derivative(u).values * v.values, h)

    ilhs = trapezoid(ops.left_tempered_integral(u, alpha).values * v.values, h)
    irhs = trapezoid(u.values * ops.right_tempered_integral(v, alpha).values, h)
    return IntegrationByPartsReport(lhs, rhs, _rel(lhs, rhs), ilhs, irhs, _rel(ilhs, irhs))


def discrete_l2_operator_norm(matrix, h: float, iters: int = 500, rtol: float = 1e-12, seed: int = 0) -> float:
    """Operator norm in the trapezoid-weighted l2 norm, by power iteration."""
    m = np.asarray(matrix)
    sw = np.sqrt(trapezoid_weights(m.shape[0] - 1, h))
    b = sw[:, None] * m / sw[None, :]
    x = np.random.default_rng(seed).standard_normal(m.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = b.T @ (b @ x)
        new = math.sqrt(np.linalg.norm(y))
        x = y / np.linalg.norm(y)
        if abs(new - est) <= rtol * new:
            est = new
            break
        est = new
    return est


def mirror_defect(u: GridFunction) -> dict:
    """Max difference between each right operator and the mirrored left one."""
    alpha = u.params.alpha
    pairs = {
        "integral": (lambda g: ops.left_tempered_integral(g, alpha), lambda g: ops.right_tempered_integral(g, alpha)),
        "caputo": (ops.left_caputo_derivative, ops.right_caputo_derivative),
        "rl": (ops.left_rl_derivative, ops.right_rl_derivative),
    }
    out = {}
    for name, (left, right) in pairs.items():
        r = right(u).values
        m = left(u.mirror()).values[::-1]
        ok = np.isfinite(r) & np.isfinite(m)
        out[name] = float(np.max(np.abs(r[ok] - m[ok])))
    return out
