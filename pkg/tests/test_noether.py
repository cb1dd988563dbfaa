import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tempvar.bvp import manufactured_bump
from tempvar.fnspace import SpaceElement, random_smooth_element
from tempvar.grid import GridFunction, TemperedParams
from tempvar.lagrangian import dirichlet, from_expression, linear_forced
from tempvar.noether import (
    EDGE,
    SYMMETRIES,
    SymmetrySpec,
    check_invariance,
    coherence_diagram,
    corollary_momentum,
    necessary_condition_residual,
    noether_constant,
    symmetry_from_catalog,
    symmetry_from_expressions,
)

P = TemperedParams(0.75, 1.0)
CLASSICAL = TemperedParams(1.0, 0.0)
TT = symmetry_from_catalog("tempered-translation", P)


def bump_trajectory(n):
    return SpaceElement.from_callable(P, n, manufactured_bump(P))


def linear_extremal(n=64):
    return GridFunction.from_callable(CLASSICAL, n, lambda t: 0.3 + 2.5 * t)


# -- symmetries ----------------------------------------------------------------------


def test_catalog():
    assert SYMMETRIES == ("translation", "tempered-translation", "scaling")
    for name in SYMMETRIES:
        s = symmetry_from_catalog(name, P)
        x = np.linspace(-1, 1, 5)
        assert np.array_equal(s.xi(0.0, x, x), x)
    with pytest.raises(KeyError):
        symmetry_from_catalog("rotation", P)


def test_identity_at_zero_enforced():
    with pytest.raises(ValueError):
        SymmetrySpec(lambda s, x, t: x + 1 + s, lambda x, t: np.ones_like(x))


def test_generator_checked():
    with pytest.raises(ValueError):
        SymmetrySpec(lambda s, x, t: x + 2 * s, lambda x, t: np.ones_like(x))


def test_expression_symmetry_generator():
    s = symmetry_from_expressions("x + s*exp(-t)")
    x, t = np.linspace(-1, 1, 4), np.linspace(0, 1, 4)
    assert np.allclose(s.eta(x, t), np.exp(-t), rtol=1e-14)
    s2 = symmetry_from_expressions("x*exp(s)", "x", P)
    assert np.allclose(s2.xi(1.0, x, t), x * np.e)


# -- invariance -------------------------------------------------------------------


def test_invariance_at_zero_shift():
    u = bump_trajectory(128)
    assert check_invariance(from_expression("y^2/2 + x^2/2"), TT, u, (0.0,)).max_deviation == 0.0


def test_dirichlet_invariant_under_tempered_translation():
    r = check_invariance(dirichlet(), TT, bump_trajectory(256), (-1.0, -0.5, 0.5, 1.0))
    assert r.max_deviation <= 1e-12
    assert len(r.deviations) == 4


def test_mass_term_breaks_invariance():
    r = check_invariance(from_expression("y^2/2 + x^2/2"), TT, bump_trajectory(256), (1.0,))
    assert r.max_deviation > 1e-2


def test_invariance_rejects_non_finite_shift():
    with pytest.raises(ValueError):
        check_invariance(dirichlet(), TT, bump_trajectory(32), (np.inf,))


# -- necessary condition ---------------------------------------------------------------


def test_necessary_condition_trivial_extremal():
    assert necessary_condition_residual(dirichlet(), TT, SpaceElement.zeros(P, 128)) <= 1e-10


def test_necessary_condition_diagnostic_on_random_element(rng):
    assert np.isfinite(necessary_condition_residual(dirichlet(), TT, random_smooth_element(P, 64, rng)))


@pytest.mark.xfail(strict=True, reason="a nonzero extremal of an invariant Lagrangian has momentum singular at b; the residual stays near 0.094")
def test_necessary_condition_decreases_on_manufactured_extremal():
    res = [necessary_condition_residual(dirichlet(), TT, bump_trajectory(n)) for n in (128, 256, 512)]
    assert res[0] / res[1] >= 1.3 and res[1] / res[2] >= 1.3


# -- Noether quantity -------------------------------------------------------------------


def test_zero_trajectory_gives_zero():
    r = noether_constant(dirichlet(), TT, SpaceElement.zeros(P, 64))
    assert not r.values.values.any() and r.max_deviation == 0.0


def test_vanishing_generator_gives_zero():
    still = symmetry_from_expressions("x")
    r = noether_constant(dirichlet(), still, bump_trajectory(64))
    assert not r.values.values.any()


def test_classical_momentum_on_linear_extremal():
    r = noether_constant(dirichlet(), symmetry_from_catalog("translation", CLASSICAL), linear_extremal())
    assert r.extras["mode"] == "classical"
    assert r.max_deviation <= 1e-10 and r.mean == pytest.approx(2.5, rel=1e-12)


def test_corollary_classical_equals_slope():
    r = corollary_momentum(dirichlet(), linear_extremal())
    assert r.mean == pytest.approx(2.5, rel=1e-12) and r.max_deviation <= 1e-10


def test_corollary_zero_trajectory():
    r = corollary_momentum(dirichlet(), SpaceElement.zeros(P, 64))
    assert r.mean == 0.0 and r.extras["boundary_limit"] == 0.0


def test_corollary_requires_x_independence():
    with pytest.raises(ValueError):
        corollary_momentum(linear_forced(1.0), bump_trajectory(64))


def test_drift_within_slack_under_refinement():
    drift = [corollary_momentum(dirichlet(), bump_trajectory(n)).relative_drift for n in (128, 256, 512, 1024)]
    assert all(b <= 1.2 * a for a, b in zip(drift, drift[1:]))


@pytest.mark.xfail(strict=True, reason="the boundary-limit expression would be 0 for a constant quantity; the measured gap is about 1.9")
def test_corollary_boundary_limit_matches_interior_mean():
    r = corollary_momentum(dirichlet(), bump_trajectory(512))
    assert r.extras["boundary_gap"] <= 0.05


def test_report_excludes_edge_nodes():
    r = noether_constant(dirichlet(), TT, bump_trajectory(64))
    assert r.interior.size == 65 - 2 * EDGE
    assert r.mean == pytest.approx(np.mean(r.interior))
    assert set(r.to_dict()) >= {"mean", "max_deviation", "relative_drift"}


# -- coherence --------------------------------------------------------------------------


def test_coherence_same_path():
    c = coherence_diagram(dirichlet(), bump_trajectory(256))
    assert set(c.modes) == {"tempered", "untempered", "classical"}
    assert max(c.same_path_defect.values()) <= 1e-10


def test_coherence_zero_trajectory():
    c = coherence_diagram(dirichlet(), SpaceElement.zeros(P, 32))
    assert all(not m.any() for m in c.modes.values())
    assert c.classical_ratio is None


def test_coherence_classical_mode_doubles_momentum():
    # both terms of the general formula reduce to Ly * eta when the integrals become the identity
    c = coherence_diagram(dirichlet(), bump_trajectory(256))
    assert c.classical_ratio == pytest.approx(2.0, rel=1e-12)


@pytest.mark.xfail(strict=True, reason="at alpha = 1 the general formula gives 2 Ly eta, not Ly eta")
def test_coherence_classical_mode_equals_momentum():
    c = coherence_diagram(dirichlet(), bump_trajectory(256))
    assert c.classical_ratio == pytest.approx(1.0, rel=1e-2)


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.6, 0.75, 0.9]), st.sampled_from([0.5, 1.0, 2.0]))
def test_coherence_same_path_property(seed, alpha, sigma):
    p = TemperedParams(alpha, sigma)
    u = random_smooth_element(p, 48, np.random.default_rng(seed))
    c = coherence_diagram(from_expression("y^2/2 + x*y/3"), u, symmetry_from_catalog("scaling", p))
    assert max(c.same_path_defect.values()) <= 1e-10
