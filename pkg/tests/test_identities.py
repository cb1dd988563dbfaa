import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PARAM_PAIRS
from tempvar import operators as ops
from tempvar.grid import GridFunction, TemperedParams
from tempvar.identities import (
    discrete_l2_operator_norm,
    integral_bound_constant,
    mirror_defect,
    trapezoid,
    trapezoid_weights,
    verify_composition,
    verify_integration_by_parts,
)
from tempvar.operators import Family, OperatorKind, Side

P = TemperedParams(0.75, 1.0)

# int_0^1 gamma(0.75, t) / Gamma(0.75) dt by scipy quad of scipy.special.gammainc
QUAD_CONSTANT_PAIRING = 0.48520263531658203


def sine(p, n):
    return GridFunction.from_callable(p, n, lambda t: np.sin(np.pi * (t - p.a) / p.length))


def test_trapezoid_rule():
    w = trapezoid_weights(4, 0.25)
    assert np.allclose(w, [0.125, 0.25, 0.25, 0.25, 0.125])
    assert trapezoid(np.array([np.nan, 1.0, 1.0, 1.0, np.inf]), 0.25) == pytest.approx(0.75)


def test_bound_constant_untempered_branch():
    p = TemperedParams(0.6, 0.0, 0.0, 2.0)
    assert integral_bound_constant(p) == pytest.approx(2.0**0.6 / math.gamma(1.6), rel=1e-15)
    near = integral_bound_constant(p.with_(sigma=1e-7))
    assert near == pytest.approx(integral_bound_constant(p), rel=1e-6)


def test_composition_on_sine():
    r1, r2 = verify_composition(sine(P, 512)), verify_composition(sine(P, 1024))
    assert r2.max() <= 5e-2
    for name, value in r2.to_dict().items():
        assert getattr(r1, name) / value >= 2**0.5, name


def test_composition_of_constant():
    res = []
    for n in (128, 512, 2048):
        r = verify_composition(GridFunction.from_callable(P, n, lambda t: np.full_like(t, 2.0)))
        assert r.left_integral_of_caputo == pytest.approx(r.right_integral_of_caputo, rel=1e-9)
        res.append(r.left_integral_of_caputo)
    assert res[-1] < 1e-3
    assert res[0] / res[1] > 3.5 and res[1] / res[2] > 3.5


def test_composition_of_constant_untempered_is_exact():
    u = GridFunction.from_callable(TemperedParams(0.75, 0.0), 256, lambda t: np.full_like(t, 2.0))
    r = verify_composition(u)
    assert r.left_integral_of_caputo < 1e-12 and r.right_integral_of_caputo < 1e-12


def test_composition_of_zero():
    assert verify_composition(GridFunction.zeros(P, 64)).max() == 0.0


def smooth_pair(p, n):
    u = GridFunction.from_callable(p, n, lambda t: t * (1 - t) * np.exp(t))
    v = GridFunction.from_callable(p, n, lambda t: np.sin(np.pi * t) ** 2 * (1 + t))
    return u, v


def test_integration_by_parts_zero_boundary():
    r = verify_integration_by_parts(*smooth_pair(P, 1024))
    assert r.derivative_residual <= 1e-3
    assert r.integral_residual <= 1e-3


def test_integration_by_parts_with_boundary_terms_converges():
    res = []
    for n in (256, 1024, 4096):
        u = GridFunction.from_callable(P, n, np.cos)
        v = GridFunction.from_callable(P, n, np.exp)
        res.append(verify_integration_by_parts(u, v).derivative_residual)
    assert res[0] > res[1] > res[2]


def test_integration_by_parts_of_zero():
    u, v = smooth_pair(P, 64)
    r = verify_integration_by_parts(GridFunction.zeros(P, 64), v)
    assert r.derivative_residual == 0.0 and r.integral_residual == 0.0


def test_integral_pairing_of_constants():
    one = GridFunction.from_callable(P, 4096, np.ones_like)
    r = verify_integration_by_parts(one, one)
    assert r.integral_residual < 1e-14
    assert r.integral_lhs == pytest.approx(QUAD_CONSTANT_PAIRING, abs=1e-7)


def test_power_iteration_matches_svd():
    m = ops.operator_matrix(OperatorKind(Side.LEFT, Family.RL_INTEGRAL, 0.75), P, 64)
    w = np.sqrt(trapezoid_weights(64, 1 / 64))
    sv = np.linalg.svd(w[:, None] * m.entries / w[None, :], compute_uv=False)[0]
    assert discrete_l2_operator_norm(m.entries, 1 / 64) == pytest.approx(sv, rel=1e-8)


@pytest.mark.parametrize("alpha,sigma", PARAM_PAIRS)
@pytest.mark.parametrize("side", [Side.LEFT, Side.RIGHT])
def test_l2_norm_bound(alpha, sigma, side):
    p = TemperedParams(alpha, sigma)
    m = ops.operator_matrix(OperatorKind(side, Family.RL_INTEGRAL, alpha), p, 256)
    assert discrete_l2_operator_norm(m.entries, 1 / 256) <= integral_bound_constant(p) * 1.02


@given(st.sampled_from(PARAM_PAIRS), st.integers(min_value=0, max_value=2**32 - 1))
def test_mirror_defect_small(pair, seed):
    p = TemperedParams(*pair, 1.0, 3.0)
    u = GridFunction(p, np.random.default_rng(seed).standard_normal(65))
    assert max(mirror_defect(u).values()) < 1e-9
