import numpy as np
import pytest

from tempvar.grid import GridFunction, TemperedParams
from tempvar.lagrangian import (
    CATALOG,
    Growth,
    LagrangianSpec,
    dirichlet,
    double_well,
    forcing_callable,
    from_catalog,
    from_expression,
    linear_forced,
    power,
)
from tempvar.variational import default_sample

P = TemperedParams(0.75, 1.0)
SAMPLE = default_sample(P, 2000)


@pytest.mark.parametrize("lag", [dirichlet(), double_well(), power(4), power(3.0), linear_forced(np.sin), linear_forced(2.0, zero_order=False)])
def test_catalog_partials_consistent(lag):
    assert lag.consistency_error(SAMPLE) <= 1e-5
    lag.check_consistency(SAMPLE)


def test_inconsistent_partials_detected():
    bad = LagrangianSpec(L=lambda x, y, t: x * y, Lx=lambda x, y, t: y, Ly=lambda x, y, t: 2 * x)
    with pytest.raises(ValueError):
        bad.check_consistency(SAMPLE)


def test_values():
    assert dirichlet()(1.0, 3.0, 0.2) == 4.5
    assert double_well()(1.0, 0.0, 0.0) == 0.0
    assert power(4)(2.0, 0.0, 0.0) == -4.0
    assert linear_forced(3.0)(2.0, 0.0, 0.5) == pytest.approx(2.0 - 6.0)


def test_non_finite_rejected():
    lag = from_expression("log(x)")
    with pytest.raises(FloatingPointError):
        lag(np.array([-1.0]), 0.0, 0.0)


def test_catalog_lookup():
    assert set(CATALOG) == {"dirichlet", "linear-forced", "double-well", "power"}
    assert from_catalog("power", p=3).name == "power(p=3)"
    assert from_catalog("linear-forced", f=1.0).name == "linear-forced"
    with pytest.raises(KeyError):
        from_catalog("quartic")
    with pytest.raises(ValueError):
        from_catalog("linear-forced")
    with pytest.raises(ValueError):
        power(1.0)


def test_expression_lagrangian_matches_catalog():
    e = from_expression("y^2/2 + (x^2 - 1)^2/4")
    d = double_well()
    x, y, t = SAMPLE
    for name in ("L", "Lx", "Ly"):
        assert np.allclose(getattr(e, name)(x, y, t), getattr(d, name)(x, y, t), rtol=1e-13)
    assert from_expression("y^2/2").x_independent and not e.x_independent


def test_forcing_callable_forms():
    g = GridFunction.from_callable(P, 8, lambda t: 2 * t)
    assert forcing_callable(g)(0.0625) == pytest.approx(0.125)
    assert np.array_equal(forcing_callable(1.5)(np.zeros(3)), [1.5] * 3)
    assert forcing_callable(np.cos) is np.cos


@pytest.mark.parametrize("bad", [dict(d1=0.0), dict(d3=1.5), dict(d4=2.0), dict(d4=0.5), dict(zeta=0.0), dict(mu_L=2.0), dict(Lambda=-1.0)])
def test_growth_ranges(bad):
    with pytest.raises(ValueError):
        Growth(**bad)
