"""Saddle point of J(u) = int (CD u)^2/2 - u^4/4 by the string method.

Run with ``python3 demos/mountain_pass_search.py``.
"""

from tempvar import TemperedParams
from tempvar.lagrangian import power
from tempvar.mountain_pass import find_critical_point, verify_geometry

p = TemperedParams(alpha=0.75, sigma=1.0)
lag = power(4)

geo = verify_geometry(lag, p, 128)
print(f"geometry: J >= {geo.eta:.3f} on a sphere, J(e) = {geo.value_at_e:.3f} < 0")

for m in (17, 34):
    rep = find_critical_point(lag, geo.e, m=m, tol=1e-4)
    print(f"m={m:3d}  critical value {rep.value:.6f}  grad {rep.grad_norm:.1e}  ({rep.message})")
