"""The Hilbert space of functions vanishing at both ends whose left tempered
Caputo derivative is square integrable, discretised with nodal hat functions.

Inner product: ``(u, v) = int u v + int (CD u)(CD v)`` with ``CD`` the left
tempered Caputo derivative, both integrals by the trapezoidal rule.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import operators as ops
from .grid import GridFunction, TemperedParams
from .identities import integral_bound_constant, trapezoid_weights
from .specfun import lower_incomplete_gamma

__all__ = [
    "SpaceElement",
    "BasisSet",
    "Diagnostic",
    "norm",
    "inner_product",
    "embedding_constant",
    "check_embedding",
    "check_poincare",
    "random_smooth_element",
]

EMBEDDING_SLACK = 1.02


@dataclass(frozen=True, eq=False)
class SpaceElement:
    """A grid function with ``u(a) = u(b) = 0`` and its cached Caputo derivative."""

    u: GridFunction
    caputo: GridFunction = field(init=False, repr=False)

    def __post_init__(self):
        self.u.params.require_embedding()
        self.u.check_finite()
        v = self.u.values
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValueError("space elements must vanish at both endpoints")
        object.__setattr__(self, "caputo", ops.left_caputo_derivative(self.u))

    @classmethod
    def from_interior(cls, params: TemperedParams, interior) -> "SpaceElement":
        c = np.asarray(interior, dtype=float)
        return cls(GridFunction(params, np.concatenate(([0.0], c, [0.0]))))

    @classmethod
    def from_callable(cls, params: TemperedParams, n: int, fn) -> "SpaceElement":
        """Sample ``fn`` at the nodes; the endpoint values are forced to zero."""
        vals = np.array(GridFunction.from_callable(params, n, fn).values)
        vals[0] = vals[-1] = 0.0
        return cls(GridFunction(params, vals))

    @classmethod
    def zeros(cls, params: TemperedParams, n: int) -> "SpaceElement":
        return cls(GridFunction.zeros(params, n))

    @property
    def params(self) -> TemperedParams:
        return self.u.params

    @property
    def n(self) -> int:
        return self.u.n

    @property
    def values(self) -> np.ndarray:
        return self.u.values

    @property
    def interior(self) -> np.ndarray:
        return self.u.values[1:-1]

    @property
    def t(self) -> np.ndarray:
        return self.u.t

    def _lift(self, values):
        return SpaceElement(GridFunction(self.params, values))

    def __add__(self, other: "SpaceElement"):
        return self._lift(self.values + other.values)

    def __sub__(self, other: "SpaceElement"):
        return self._lift(self.values - other.values)

    def __mul__(self, c: float):
        return self._lift(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self._lift(-self.values)


def inner_product(u: SpaceElement, v: SpaceElement) -> float:
    if u.n != v.n or u.params != v.params:
        raise ValueError("elements live on different grids")
    w = trapezoid_weights(u.n, u.u.h)
    return float(w @ (u.values * v.values) + w @ (u.caputo.values * v.caputo.values))


def norm(u: SpaceElement) -> float:
    # rescaled so that tiny or huge elements neither underflow nor overflow
    scale = max(float(np.max(np.abs(u.values))), float(np.max(np.abs(u.caputo.values))))
    if scale == 0.0:
        return 0.0
    w = trapezoid_weights(u.n, u.u.h)
    x, y = u.values / scale, u.caputo.values / scale
    return scale * math.sqrt(float(w @ (x * x) + w @ (y * y)))


def embedding_constant(params: TemperedParams) -> float:
    r"""Constant ``C`` with :math:`\|u\|_\infty \le C \|u\|`.

    .. math::

        C = \frac{\sqrt{\gamma(2\alpha - 1, 2\sigma(b - a))}}
                 {(2\sigma)^{\alpha - 1/2}\,\Gamma(\alpha)}
    """
    params.require_embedding()
    a, s = params.alpha, params.sigma
    g = lower_incomplete_gamma(2.0 * a - 1.0, 2.0 * s * params.length)
    return math.sqrt(g) / ((2.0 * s) ** (a - 0.5) * math.gamma(a))


@dataclass(frozen=True)
class Diagnostic:
    """One inequality check: ``lhs <= rhs`` (rhs already includes any slack)."""

    check: str
    params: TemperedParams
    lhs: float
    rhs: float
    ratio: float | None = None

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs

    def to_json(self) -> dict:
        p = self.params
        return {
            "check": self.check,
            "params": {"alpha": p.alpha, "sigma": p.sigma, "a": p.a, "b": p.b},
            "lhs": self.lhs,
            "rhs": self.rhs,
            "pass": self.passed,
            **({} if self.ratio is None else {"ratio": self.ratio}),
        }


def check_embedding(u: SpaceElement, slack: float = EMBEDDING_SLACK) -> Diagnostic:
    """Sup-norm versus ``C * ||u||`` with a 2% allowance for quadrature error."""
    lhs = float(np.max(np.abs(u.values)))
    return Diagnostic("embedding", u.params, lhs, embedding_constant(u.params) * norm(u) * slack)


def check_poincare(u: SpaceElement, slack: float = EMBEDDING_SLACK) -> Diagnostic:
    """Poincare ratio ``||u||_2 / ||CD u||_2`` (``ratio`` field).

    ``lhs <= rhs`` tests it against ``K ||CD u||_2``, ``K`` the
    tempered-integral norm bound, which follows from ``u = I CD u`` for
    functions vanishing at ``a``. Raises ``ValueError`` for ``u = 0``.
    """
    w = trapezoid_weights(u.n, u.u.h)
    l2u = math.sqrt(w @ u.values**2)
    l2d = math.sqrt(w @ u.caputo.values**2)
    if l2u == 0.0:
        raise ValueError("Poincare ratio undefined for the zero element")
    bound = integral_bound_constant(u.params) * l2d * slack
    return Diagnostic("poincare", u.params, l2u, bound, ratio=l2u / l2d)


def random_smooth_element(params: TemperedParams, n: int, rng, modes: int = 8, decay: float = 1.0) -> SpaceElement:
    """A random sine series ``sum c_k sin(k pi (t-a)/(b-a))`` with ``c_k ~ N(0, k^-2decay)``."""
    k = np.arange(1, modes + 1)
    coef = rng.standard_normal(modes) / k**decay
    x = (params.nodes(n) - params.a) / params.length
    vals = np.sin(np.pi * np.outer(x, k)) @ coef
    vals[0] = vals[-1] = 0.0
    return SpaceElement(GridFunction(params, vals))


class BasisSet:
    """Interior nodal hat functions on an ``n``-interval grid.

    ``derivative`` holds the Caputo derivatives of the hats (nodal values),
    ``gram`` the matrix of inner products, so that
    ``inner_product(u, v) == u.interior @ gram @ v.interior``.
    """

    def __init__(self, params: TemperedParams, n: int):
        params.require_embedding()
        if n < 2:
            raise ValueError("need n >= 2")
        self.params = params
        self.n = n
        self.h = params.length / n
        kind = ops.OperatorKind("left", "caputo_derivative")
        full = ops.operator_matrix(kind, params, n).entries
        self.derivative = full[:, 1:-1]
        self.weights = trapezoid_weights(n, self.h)
        wd = self.weights[:, None] * self.derivative
        gram = self.derivative.T @ wd
        gram[np.diag_indices_from(gram)] += self.weights[1:-1]
        self.gram = 0.5 * (gram + gram.T)
        self.gram.flags.writeable = False

    @functools.cached_property
    def cholesky(self):
        return scipy.linalg.cho_factor(self.gram)

    def riesz(self, functional_values) -> np.ndarray:
        """Coefficients of the representer of a linear functional given by its hat values."""
        return scipy.linalg.cho_solve(self.cholesky, functional_values)

    def element(self, coefficients) -> SpaceElement:
        return SpaceElement.from_interior(self.params, coefficients)

    def coefficients(self, u: SpaceElement) -> np.ndarray:
        if u.n != self.n:
            raise ValueError("element lives on a different grid")
        return np.array(u.interior)

    def __len__(self):
        return self.n - 1


@functools.lru_cache(maxsize=16)
def basis(params: TemperedParams, n: int) -> BasisSet:
    """Cached :class:`BasisSet` for a parameter set and grid."""
    return BasisSet(params, n)
