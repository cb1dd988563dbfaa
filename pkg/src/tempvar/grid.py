"""Parameters and grid functions shared by every operator."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = ["TemperedParams", "GridFunction", "read_csv", "write_csv"]


@dataclass(frozen=True)
class TemperedParams:
    """Order ``alpha``, tempering ``sigma`` and interval ``[a, b]``.

    ``alpha == 1`` is accepted as the classical (first-derivative) mode and
    ``sigma == 0`` recovers the untempered operators.
    """

    alpha: float
    sigma: float
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "sigma", "a", "b"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def classical(self) -> bool:
        return self.alpha == 1.0

    def with_(self, **changes) -> "TemperedParams":
        return replace(self, **changes)

    def nodes(self, n: int) -> np.ndarray:
        return np.linspace(self.a, self.b, n + 1)

    def require_embedding(self):
        """Raise unless ``alpha`` in (1/2, 1) and ``sigma > 0``."""
        if not 0.5 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (1/2, 1), got {self.alpha}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Node values of a function on the uniform grid ``t_i = a + i h``.

    Non-finite entries are allowed only where an operator flags a singular
    endpoint; :attr:`singular` reports them.
    """

    params: TemperedParams
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise ValueError("values must be a 1-d array with at least 3 entries (n >= 2)")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, params: TemperedParams, n: int, fn) -> "GridFunction":
        t = params.nodes(n)
        return cls(params, np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape))

    @classmethod
    def zeros(cls, params: TemperedParams, n: int) -> "GridFunction":
        return cls(params, np.zeros(n + 1))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        return self.params.length / self.n

    @property
    def t(self) -> np.ndarray:
        return self.params.nodes(self.n)

    @property
    def singular(self) -> np.ndarray:
        return ~np.isfinite(self.values)

    def check_finite(self):
        if self.singular.any():
            raise ValueError("grid function has non-finite values")

    def mirror(self) -> "GridFunction":
        """The reflection ``t -> a + b - t``."""
        return GridFunction(self.params, self.values[::-1])

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.params, values)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, c):
        return self.with_values(self.values * _vals(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _vals(x):
    return x.values if isinstance(x, GridFunction) else x


def write_csv(path, u: GridFunction):
    """Write ``t,value`` rows with round-trip precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for ti, vi in zip(u.t, u.values):
            w.writerow([repr(float(ti)), repr(float(vi))])


def read_csv(path):
    """Read a ``t,value`` CSV; returns ``(t, values)`` arrays."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if [h.strip() for h in header] != ["t", "value"]:
            raise ValueError(f"{path}: expected header 't,value', got {header!r}")
        rows = [(float(a), float(b)) for a, b in r]
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]
