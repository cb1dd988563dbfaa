"""Manufactured-solution study for the fractional boundary value problem.

Pick u*, compute the forcing it needs, solve on coarse grids and watch the
error shrink. Run with ``python3 demos/bvp_convergence.py``.
"""

import numpy as np

from tempvar import TemperedParams
from tempvar.bvp import assemble, convergence_study, galerkin_residual, solve

p = TemperedParams(alpha=0.75, sigma=1.0)

for row in convergence_study(p, lambda t: np.sin(np.pi * t)):
    ratio = "" if row["ratio"] is None else f"  ratio {row['ratio']:.2f}"
    print(f"n={row['n']:4d}  L2 error {row['l2_error']:.4e}{ratio}")

# A constant forcing: the Galerkin equations hold to roundoff.
system = assemble(p, 128, 1.0)
u = solve(system)
print(f"f = 1: max u = {u.values.max():.5f}, Galerkin residual {galerkin_residual(system, u):.1e}")
