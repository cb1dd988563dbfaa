"""Tempered fractional calculus of variations on uniform grids.

Submodules:

* :mod:`tempvar.specfun` gamma and lower incomplete gamma functions
* :mod:`tempvar.operators` tempered integrals and derivatives, with
  :mod:`tempvar.identities` for their numerical checks
* :mod:`tempvar.fnspace` the zero-boundary function space and its hat basis
* :mod:`tempvar.variational` functionals, gradients and the direct minimiser
* :mod:`tempvar.noether` symmetries and the Noether quantity
* :mod:`tempvar.bvp` the linear boundary value problem
* :mod:`tempvar.mountain_pass` saddle-point search
* :mod:`tempvar.cli` the ``tempvar`` command
"""

from .grid import GridFunction, TemperedParams

__all__ = ["GridFunction", "TemperedParams"]
__version__ = "0.1.0"
