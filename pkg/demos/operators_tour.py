"""Tour of the tempered operators on a uniform grid.

Run with ``python3 demos/operators_tour.py``.
"""

import numpy as np

from tempvar import GridFunction, TemperedParams
from tempvar import operators as ops
from tempvar.identities import integral_bound_constant, verify_composition

p = TemperedParams(alpha=0.75, sigma=1.0)

# The tempered Caputo derivative kills e^{-sigma (t - a)}, the tempered
# analogue of "the derivative of a constant is zero".
damped = GridFunction.from_callable(p, 256, lambda t: np.exp(-p.sigma * t))
print("max |CD e^(-sigma t)|      :", np.max(np.abs(ops.left_caputo_derivative(damped).values)))

# Integral then derivative gives the function back, at first order in h.
print("composition residuals for sin(pi t):")
for n in (128, 256, 512, 1024):
    u = GridFunction.from_callable(p, n, lambda t: np.sin(np.pi * t))
    print(f"  n={n:5d}", {k: f"{v:.2e}" for k, v in verify_composition(u).to_dict().items()})

# The integral is a bounded operator on L2 with an explicit constant.
u = GridFunction.from_callable(p, 1024, lambda t: np.cos(3 * t))
iu = ops.left_tempered_integral(u, p.alpha)
h = p.length / 1024
l2 = lambda g: np.sqrt(h * np.sum(g.values**2))
print(f"||I u|| = {l2(iu):.4f} <= K ||u|| = {integral_bound_constant(p) * l2(u):.4f}")
