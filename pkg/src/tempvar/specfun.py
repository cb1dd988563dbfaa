"""Gamma and lower incomplete gamma functions.

The lower incomplete gamma function is evaluated with the usual split:
a power series for ``x < alpha + 1`` and a Lentz continued fraction for the
upper tail otherwise, giving ``gamma(alpha) - Gamma(alpha, x)``.
"""

import math

import numpy as np

__all__ = ["gamma_fn", "lower_incomplete_gamma", "lower_incomplete_gamma_vec"]

_EPS = 1e-17
_TINY = 1e-300
_MAX_ITER = 10_000


def _check_alpha(alpha):
    if not math.isfinite(alpha) or alpha <= 0:
        raise ValueError(f"alpha must be finite and > 0, got {alpha!r}")


def gamma_fn(alpha: float) -> float:
    """Complete gamma function for ``alpha > 0``."""
    alpha = float(alpha)
    _check_alpha(alpha)
    return math.gamma(alpha)


def _series(alpha, x):
    # gamma(a, x) = x^a e^{-x} sum_k x^k / (a (a+1) ... (a+k))
    term = 1.0 / alpha
    total = term
    ap = alpha
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise RuntimeError("incomplete gamma series did not converge")
    return total * math.exp(alpha * math.log(x) - x)


def _upper_cf(alpha, x):
    # modified Lentz evaluation of Gamma(a, x) e^{x} x^{-a}
    b = x + 1.0 - alpha
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - alpha)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise RuntimeError("incomplete gamma continued fraction did not converge")
    return h * math.exp(alpha * math.log(x) - x)


def lower_incomplete_gamma(alpha: float, x: float) -> float:
    r"""Lower incomplete gamma function :math:`\int_0^x t^{\alpha-1} e^{-t}\,dt`.

    Parameters
    ----------
    alpha : float
        Shape parameter, ``alpha > 0``.
    x : float
        Upper integration limit, ``x >= 0``.

    Raises
    ------
    ValueError
        If ``alpha <= 0``, ``x < 0`` or either argument is not finite.
    """
    alpha = float(alpha)
    x = float(x)
    _check_alpha(alpha)
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"x must be finite and >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < alpha + 1.0:
        return _series(alpha, x)
    return math.gamma(alpha) - _upper_cf(alpha, x)


def lower_incomplete_gamma_vec(alpha, x):
    """Elementwise :func:`lower_incomplete_gamma`; ``alpha`` and ``x`` broadcast."""
    alpha, x = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(x, dtype=float))
    out = np.array([lower_incomplete_gamma(float(ai), float(xi)) for ai, xi in zip(alpha.ravel(), x.ravel())])
    return out.reshape(x.shape)
