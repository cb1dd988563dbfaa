r"""Galerkin solver for :math:`D_{b-} D_{a+} u + u = f`, ``u(a) = u(b) = 0``.

Weak form: find ``u`` with ``a(u, v) = phi(v)`` for every ``v``, where

    a(u, v) = int (D_{a+} u)(D_{a+} v) + int u v,        phi(v) = int f v.

On the interior hat basis the left RL derivative coincides with the Caputo
one (the hats vanish at ``a``), so ``A`` is the Gram matrix of the space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.polynomial import Polynomial

from . import operators as ops
from .expr import parse
from .fnspace import SpaceElement, basis
from .grid import GridFunction, TemperedParams
from .identities import trapezoid_weights
from .specfun import lower_incomplete_gamma

__all__ = [
    "BilinearSystem",
    "assemble",
    "solve",
    "galerkin_residual",
    "energy_gap",
    "forward_map",
    "l2_error",
    "convergence_study",
    "tempered_integral_of_polynomial",
    "ManufacturedBump",
    "manufactured_bump",
    "as_callable",
]


@dataclass(frozen=True, eq=False)
class BilinearSystem:
    params: TemperedParams
    n: int
    A: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)


def _sample(params, n, f):
    if isinstance(f, GridFunction):
        if f.n != n or f.params.a != params.a or f.params.b != params.b:
            return np.interp(params.nodes(n), f.t, f.values)
        return np.array(f.values)
    return np.array(GridFunction.from_callable(params, n, as_callable(f)).values)


def assemble(params: TemperedParams, n: int, f) -> BilinearSystem:
    """Stiffness-plus-mass matrix and load vector on ``n`` intervals.

    ``f`` may be a :class:`GridFunction` (interpolated if on another grid),
    a callable of ``t``, a number or an expression string in ``t``.
    """
    params.require_embedding()
    if n < 4:
        raise ValueError("need n >= 4")
    b = basis(params, n)
    fv = _sample(params, n, f)
    if not np.all(np.isfinite(fv)):
        raise ValueError("forcing has non-finite values")
    rhs = (b.weights * fv)[1:-1]
    return BilinearSystem(params, n, b.gram, rhs)


def solve(system: BilinearSystem) -> SpaceElement:
    """Cholesky solve; raises ``numpy.linalg.LinAlgError`` if ``A`` is not positive definite."""
    b = basis(system.params, system.n)
    if system.A is b.gram:
        c = b.riesz(system.rhs)
    else:
        c = scipy.linalg.cho_solve(scipy.linalg.cho_factor(system.A), system.rhs)
    return SpaceElement.from_interior(system.params, c)


def galerkin_residual(system: BilinearSystem, u: SpaceElement) -> float:
    """``max_i |a(u, phi_i) - phi(phi_i)|``."""
    c = u.interior
    return float(np.max(np.abs(system.A @ c - system.rhs)))


def energy_gap(system: BilinearSystem, u: SpaceElement) -> float:
    """``|a(u, u) - phi(u)|``; zero for the Galerkin solution."""
    c = u.interior
    return abs(float(c @ system.A @ c) - float(system.rhs @ c))


def as_callable(f):
    """Callable of ``t`` from a number, expression string or callable."""
    if callable(f):
        return f
    if isinstance(f, str):
        e = parse(f, ("t",))
        return lambda t: e(t=t)
    c = float(f)
    return lambda t: np.full(np.shape(t), c)


def forward_map(
    params: TemperedParams,
    u_star,
    n_fine: int,
    n_coarse: int | None = None,
    *,
    zero_order: bool = True,
) -> GridFunction:
    """Forcing ``f = D_{b-}(CD_{a+} u*) + u*`` for a prescribed solution.

    ``u_star`` is sampled on ``n_fine`` intervals and must vanish at both
    ends. With ``n_coarse`` the result is restricted to the coarse grid
    (``n_fine`` a multiple of ``n_coarse``), keeping interior values and
    extrapolating linearly to the two endpoints, where the right RL
    derivative may be singular. ``zero_order=False`` drops the ``+ u*`` term.
    """
    fn = as_callable(u_star)
    u = GridFunction.from_callable(params, n_fine, fn)
    p = ops.left_caputo_derivative(u)
    f = ops.right_rl_derivative(p).values
    if zero_order:
        f = f + u.values
    if n_coarse is None:
        n_coarse = n_fine
    if n_fine % n_coarse:
        raise ValueError("n_fine must be a multiple of n_coarse")
    vals = np.array(f[:: n_fine // n_coarse])
    vals[0] = 2.0 * vals[1] - vals[2]
    vals[-1] = 2.0 * vals[-2] - vals[-3]
    return GridFunction(params, vals)


def l2_error(u: SpaceElement, exact) -> float:
    """Trapezoidal L2 distance between ``u`` and ``exact`` at the nodes."""
    e = u.values - as_callable(exact)(u.t)
    return math.sqrt(float(trapezoid_weights(u.n, u.u.h) @ e**2))


def convergence_study(params: TemperedParams, u_star, ns=(32, 64, 128, 256), refine: int = 8) -> list:
    """Solve with manufactured forcing on each grid; rows ``{n, l2_error, ratio}``."""
    rows = []
    prev = None
    for n in ns:
        f = forward_map(params, u_star, refine * n, n)
        u = solve(assemble(params, n, f))
        err = l2_error(u, u_star)
        rows.append({"n": int(n), "l2_error": err, "ratio": None if prev is None else prev / err})
        prev = err
    return rows


# -- exact tempered integrals of polynomials ---------------------------------


def tempered_integral_of_polynomial(params: TemperedParams, q: Polynomial, t, order: float | None = None):
    r"""Exact left tempered integral of a polynomial ``q`` (in absolute ``t``).

    Expanding ``q`` in Taylor series about ``x`` gives

    .. math::

        I^{\beta,\sigma}_{a+} q(x) = \frac{1}{\Gamma(\beta)} \sum_j
        \frac{(-1)^j q^{(j)}(x)}{j!}\,\frac{\gamma(\beta + j, \sigma(x-a))}{\sigma^{\beta+j}}

    with the ``sigma = 0`` limit ``(x-a)^{beta+j} / (beta+j)`` in place of
    the incomplete-gamma factor.
    """
    beta = params.alpha if order is None else order
    s = params.sigma
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    deriv = q
    fact = 1.0
    for j in range(q.degree() + 1):
        cj = (-1) ** j * deriv(t) / fact
        z = t - params.a
        if s > 0:
            g = np.array([lower_incomplete_gamma(beta + j, s * zi) for zi in z]) / s ** (beta + j)
        else:
            g = z ** (beta + j) / (beta + j)
        out += cj * g
        deriv = deriv.deriv()
        fact *= j + 1
    return out / math.gamma(beta)


@dataclass(frozen=True)
class ManufacturedBump:
    r"""``u* = I^{alpha,sigma}_{a+} q`` with the cubic ``q(s) = (s-a)(b-s)(s-m)``.

    ``m`` is chosen so that ``u*(b) = 0``. Because ``q(a) = 0`` the Caputo
    derivative of ``u*`` is ``q`` exactly, so ``q`` is also the momentum
    ``Ly`` of ``L = y^2/2`` along ``u*``. Unlike ``sin``, this ``u*`` keeps
    the Euler-Lagrange forcing bounded at both endpoints.
    """

    params: TemperedParams
    q: Polynomial

    def __call__(self, t):
        return tempered_integral_of_polynomial(self.params, self.q, t)

    def caputo(self, t):
        return self.q(np.asarray(t, dtype=float))


def manufactured_bump(params: TemperedParams) -> ManufacturedBump:
    a, b = params.a, params.b
    base = Polynomial([-a, 1.0]) * Polynomial([b, -1.0])  # (s-a)(b-s)
    s_poly = Polynomial([0.0, 1.0])
    hit = tempered_integral_of_polynomial(params, base * s_poly, [b])[0]
    norm = tempered_integral_of_polynomial(params, base, [b])[0]
    m = hit / norm
    return ManufacturedBump(params, base * Polynomial([-m, 1.0]))
