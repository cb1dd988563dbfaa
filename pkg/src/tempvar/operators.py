r"""Discrete tempered fractional integrals and derivatives on uniform grids.

Every operator is the classical one conjugated by :math:`e^{\pm\sigma t}`.
On a uniform grid the conjugation factor of entry ``(i, j)`` is
:math:`e^{-\sigma h |i - j|}`, so the tempered matrices keep the Toeplitz
structure of their classical counterparts (up to the first column, which
carries the boundary weights).

* integrals of order :math:`\beta \in (0, 1]`: product-trapezoidal rule,
  piecewise-linear interpolation of :math:`e^{\sigma s}u(s)` integrated
  exactly against :math:`(x - s)^{\beta - 1}`;
* Caputo derivatives of order :math:`\alpha`: L1 scheme;
* Riemann-Liouville derivatives: Caputo plus the boundary term
  :math:`u(a)(t-a)^{-\alpha}e^{-\sigma(t-a)}/\Gamma(1-\alpha)`.

Right-sided operators are the reflections ``J M J`` of the left ones.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import rgamma

from .grid import GridFunction, TemperedParams

__all__ = [
    "Side",
    "Family",
    "OperatorKind",
    "OperatorMatrix",
    "left_tempered_integral",
    "right_tempered_integral",
    "left_caputo_derivative",
    "right_caputo_derivative",
    "left_rl_derivative",
    "right_rl_derivative",
    "operator_matrix",
    "apply",
]


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Family(enum.Enum):
    RL_INTEGRAL = "rl_integral"
    RL_DERIVATIVE = "rl_derivative"
    CAPUTO_DERIVATIVE = "caputo_derivative"


@dataclass(frozen=True)
class OperatorKind:
    """Which operator: side, family and (for integrals) the order."""

    side: Side
    family: Family
    order: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.RL_INTEGRAL:
            if self.order is None or not 0.0 < self.order <= 1.0:
                raise ValueError(f"integral order must lie in (0, 1], got {self.order}")
        elif self.order is not None:
            raise ValueError("derivative order is params.alpha; do not pass order")


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix form of one operator; ``singular_rows`` are zeroed."""

    kind: OperatorKind
    params: TemperedParams
    n: int
    entries: np.ndarray = field(repr=False)
    singular_rows: tuple = ()

    def __matmul__(self, u):
        vals = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)
        return self.entries @ vals

    def to_csv(self, path):
        np.savetxt(path, self.entries, delimiter=",", fmt="%.17g")


# -- weights -----------------------------------------------------------------


def _pow0(k, p):
    # k**p with 0**p := 0 for every p >= 0 (the alpha -> 1 limit of 0**(1-alpha))
    k = np.asarray(k, dtype=float)
    return np.where(k > 0, np.power(k, p), 0.0)


@functools.lru_cache(maxsize=64)
def _integral_weights(order, sigma, h, n):
    """Toeplitz vector and first column of the tempered product-trapezoid rule."""
    k = np.arange(n + 1, dtype=float)
    p = order + 1.0
    c = np.empty(n + 1)
    c[0] = 1.0
    km = k[1:]
    c[1:] = (km + 1.0) ** p - 2.0 * km**p + (km - 1.0) ** p
    w0 = np.zeros(n + 1)
    w0[1:] = (km - 1.0) ** p - (km - 1.0 - order) * km**order
    damp = np.exp(-sigma * h * k)
    scale = h**order / math.gamma(order + 2.0)
    c = c * damp * scale
    w0 = w0 * damp * scale
    c.flags.writeable = False
    w0.flags.writeable = False
    return c, w0


@functools.lru_cache(maxsize=64)
def _caputo_weights(alpha, sigma, h, n):
    """Toeplitz vector and first column of the tempered L1 scheme."""
    k = np.arange(n + 1, dtype=float)
    bk = _pow0(k + 1.0, 1.0 - alpha) - _pow0(k, 1.0 - alpha)
    d = np.empty(n + 1)
    d[0] = bk[0]
    d[1:] = bk[1:] - bk[:-1]
    w0 = np.zeros(n + 1)
    w0[1:] = -bk[:-1]
    damp = np.exp(-sigma * h * k)
    scale = h ** (-alpha) / math.gamma(2.0 - alpha)
    d = d * damp * scale
    w0 = w0 * damp * scale
    d.flags.writeable = False
    w0.flags.writeable = False
    return d, w0


def _toeplitz_apply(c, w0, v):
    y = np.convolve(c, v)[: v.size]
    y += (w0 - c) * v[0]
    return y


def _toeplitz_dense(c, w0):
    m = scipy.linalg.toeplitz(c, np.zeros_like(c))
    m[:, 0] = w0
    return m


def _boundary_kernel(params, n):
    """(t - a)^(-alpha) e^(-sigma (t - a)) / Gamma(1 - alpha) at nodes 1..n."""
    h = params.length / n
    s = h * np.arange(1, n + 1)
    return float(rgamma(1.0 - params.alpha)) * s ** (-params.alpha) * np.exp(-params.sigma * s)


# -- left operators on raw arrays ----------------------------------------------


def _left_integral(v, params, order):
    n = v.size - 1
    c, w0 = _integral_weights(float(order), params.sigma, params.length / n, n)
    return _toeplitz_apply(c, w0, v)


def _left_caputo(v, params):
    n = v.size - 1
    d, w0 = _caputo_weights(params.alpha, params.sigma, params.length / n, n)
    return _toeplitz_apply(d, w0, v)


def _left_rl(v, params):
    y = _left_caputo(v, params)
    if params.alpha < 1.0 and v[0] != 0.0:
        y[1:] += v[0] * _boundary_kernel(params, v.size - 1)
        y[0] = np.nan
    return y


def _right(fn, v, *args):
    return fn(v[::-1], *args)[::-1].copy()


def _check_order(order, params, zero_order_identity):
    if order == 0 and zero_order_identity:
        if params.sigma != 0.0:
            raise ValueError("the order-0 identity convention is only defined for sigma = 0")
        return True
    if not 0.0 < order <= 1.0:
        raise ValueError(f"integral order must lie in (0, 1], got {order}")
    return False


# -- public grid-function API --------------------------------------------------


def left_tempered_integral(u: GridFunction, order: float, *, zero_order_identity: bool = False) -> GridFunction:
    r"""Left tempered Riemann-Liouville integral of the given order.

    .. math::

        \frac{1}{\Gamma(\beta)} \int_a^x (x - s)^{\beta - 1} e^{-\sigma (x - s)} u(s)\,ds

    ``zero_order_identity=True`` lets ``order == 0`` return ``u`` itself, the
    convention for the untempered case ``sigma == 0``.
    """
    u.check_finite()
    if _check_order(order, u.params, zero_order_identity):
        return u
    return u.with_values(_left_integral(u.values, u.params, order))


def right_tempered_integral(u: GridFunction, order: float, *, zero_order_identity: bool = False) -> GridFunction:
    """Right-sided mirror of :func:`left_tempered_integral` (integrates over ``[x, b]``)."""
    u.check_finite()
    if _check_order(order, u.params, zero_order_identity):
        return u
    return u.with_values(_right(_left_integral, u.values, u.params, order))


def left_caputo_derivative(u: GridFunction) -> GridFunction:
    """Left tempered Caputo derivative of order ``params.alpha`` (L1 scheme)."""
    u.check_finite()
    return u.with_values(_left_caputo(u.values, u.params))


def right_caputo_derivative(u: GridFunction) -> GridFunction:
    """Right tempered Caputo derivative, the reflection of the left one."""
    u.check_finite()
    return u.with_values(_right(_left_caputo, u.values, u.params))


def left_rl_derivative(u: GridFunction) -> GridFunction:
    """Left tempered Riemann-Liouville derivative.

    Computed as the Caputo derivative plus the boundary term carried by
    ``u(a)``. When ``u(a) != 0`` the value at ``t = a`` diverges and is
    returned as NaN (see :attr:`GridFunction.singular`).
    """
    u.check_finite()
    return u.with_values(_left_rl(u.values, u.params))


def right_rl_derivative(u: GridFunction) -> GridFunction:
    """Right tempered Riemann-Liouville derivative; NaN at ``t = b`` if ``u(b) != 0``."""
    u.check_finite()
    return u.with_values(_right(_left_rl, u.values, u.params))


def apply(kind: OperatorKind, u: GridFunction) -> GridFunction:
    """Dispatch on an :class:`OperatorKind`."""
    table = {
        (Side.LEFT, Family.RL_INTEGRAL): lambda: left_tempered_integral(u, kind.order),
        (Side.RIGHT, Family.RL_INTEGRAL): lambda: right_tempered_integral(u, kind.order),
        (Side.LEFT, Family.CAPUTO_DERIVATIVE): lambda: left_caputo_derivative(u),
        (Side.RIGHT, Family.CAPUTO_DERIVATIVE): lambda: right_caputo_derivative(u),
        (Side.LEFT, Family.RL_DERIVATIVE): lambda: left_rl_derivative(u),
        (Side.RIGHT, Family.RL_DERIVATIVE): lambda: right_rl_derivative(u),
    }
    return table[(kind.side, kind.family)]()


def operator_matrix(kind: OperatorKind, params: TemperedParams, n: int) -> OperatorMatrix:
    """Dense matrix ``M`` with ``M @ u.values`` reproducing the operator.

    Left operators are lower triangular, right ones upper triangular. For
    Riemann-Liouville derivatives the row of the singular endpoint is zeroed
    and listed in ``singular_rows``; the matrix then reproduces the operator
    at every other node.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    h = params.length / n
    singular = ()
    if kind.family is Family.RL_INTEGRAL:
        m = _toeplitz_dense(*_integral_weights(float(kind.order), params.sigma, h, n))
    else:
        m = _toeplitz_dense(*_caputo_weights(params.alpha, params.sigma, h, n))
        if kind.family is Family.RL_DERIVATIVE and params.alpha < 1.0:
            m[1:, 0] += _boundary_kernel(params, n)
            m[0, :] = 0.0
            singular = (0,)
    if kind.side is Side.RIGHT:
        m = m[::-1, ::-1].copy()
        singular = tuple(n - i for i in singular)
    m.flags.writeable = False
    return OperatorMatrix(kind, params, n, m, singular)
