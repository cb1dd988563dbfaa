"""Acceptance criteria 1-13, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict, printed in the
"acceptance criteria" section at the end of the pytest run.
"""

import json
import math
import subprocess
import sys

import numpy as np

from conftest import PARAM_PAIRS, record_criterion
from tempvar import operators as ops
from tempvar.bvp import assemble, energy_gap, forward_map, galerkin_residual, l2_error, manufactured_bump, solve
from tempvar.fnspace import SpaceElement, check_embedding, norm, random_smooth_element
from tempvar.grid import GridFunction, TemperedParams
from tempvar.identities import (
    discrete_l2_operator_norm,
    integral_bound_constant,
    verify_composition,
    verify_integration_by_parts,
)
from tempvar.lagrangian import dirichlet, double_well, linear_forced, power
from tempvar.mountain_pass import find_critical_point, verify_geometry
from tempvar.noether import check_invariance, coherence_diagram, corollary_momentum, noether_constant, symmetry_from_catalog
from tempvar.operators import Family, OperatorKind, Side
from tempvar.specfun import lower_incomplete_gamma_vec
from tempvar.variational import evaluate, gateaux_derivative, minimize_direct

P = TemperedParams(0.75, 1.0, 0.0, 1.0)


def test_criterion_01_incomplete_gamma():
    rng = np.random.default_rng(1)
    a = 3.0 * (1.0 - rng.random(1000))  # (0, 3]
    x = rng.uniform(0.0, 50.0, 1000)
    g = lower_incomplete_gamma_vec(a, x)
    violations = int(np.sum((g < np.exp(-x) * x**a / a - 1e-12) | (g > x**a / a + 1e-12)))
    lhs = lower_incomplete_gamma_vec(a + 1.0, x)
    rhs = a * g - x**a * np.exp(-x)
    rec = float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-300)))
    ok = violations == 0 and rec <= 1e-10
    assert record_criterion(1, ok, f"bound violations={violations}, max recurrence rel err={rec:.2e}")


def test_criterion_02_exponential_annihilation():
    worst = 0.0
    for alpha, sigma in PARAM_PAIRS:
        p = TemperedParams(alpha, sigma)
        u = GridFunction.from_callable(p, 256, lambda t: np.exp(-sigma * (t - p.a)))
        worst = max(worst, float(np.max(np.abs(ops.left_caputo_derivative(u).values))))
    ok = worst <= 1e-12
    assert record_criterion(2, ok, f"max |CD e^(-sigma(t-a))| over 9 pairs = {worst:.2e}")


def test_criterion_03_composition():
    def sine(n):
        return GridFunction.from_callable(P, n, lambda t: np.sin(np.pi * (t - P.a) / P.length))

    coarse, fine = verify_composition(sine(512)).to_dict(), verify_composition(sine(1024)).to_dict()
    ratios = {k: coarse[k] / fine[k] for k in fine}
    ok = max(fine.values()) <= 5e-2 and min(ratios.values()) >= 2**0.5
    assert record_criterion(3, ok, f"max residual n=1024 {max(fine.values()):.2e}, min ratio {min(ratios.values()):.2f}")


def test_criterion_04_integration_by_parts():
    def pair(n):
        u = GridFunction.from_callable(P, n, lambda t: t * (1 - t) * np.exp(t))
        v = GridFunction.from_callable(P, n, lambda t: np.sin(np.pi * t) ** 2 * (1 + t))
        return verify_integration_by_parts(u, v)

    reps = [pair(n) for n in (256, 512, 1024)]
    deriv = [r.derivative_residual for r in reps]
    integ = [r.integral_residual for r in reps]
    # the discrete derivative form is exact up to roundoff (summation by parts),
    # so "decreasing" is read as non-increasing above a 1e-13 roundoff floor
    floor = 1e-13
    decreasing = all(b <= max(a, floor) for s in (deriv, integ) for a, b in zip(s, s[1:]))
    ok = max(deriv[-1], integ[-1]) <= 1e-3 and decreasing
    assert record_criterion(4, ok, f"n=1024 residuals derivative={deriv[-1]:.1e} integral={integ[-1]:.1e}, decreasing={decreasing}")


def test_criterion_05_l2_operator_norm():
    worst = 0.0
    for alpha, sigma in PARAM_PAIRS:
        p = TemperedParams(alpha, sigma)
        bound = integral_bound_constant(p)
        for side in (Side.LEFT, Side.RIGHT):
            m = ops.operator_matrix(OperatorKind(side, Family.RL_INTEGRAL, alpha), p, 256)
            worst = max(worst, discrete_l2_operator_norm(m.entries, p.length / 256) / bound)
    ok = worst <= 1.02
    assert record_criterion(5, ok, f"max measured norm / bound = {worst:.3f}")


def test_criterion_06_embedding():
    rng = np.random.default_rng(6)
    diags = [check_embedding(random_smooth_element(P, 256, rng)) for _ in range(100)]
    violations = sum(not d.passed for d in diags)
    worst = max(d.lhs / d.rhs for d in diags)
    assert record_criterion(6, violations == 0, f"violations={violations}/100, max sup/(C*norm*1.02)={worst:.3f}")


def test_criterion_07_gateaux():
    rng = np.random.default_rng(7)
    worst = 0.0
    for lag in (dirichlet(), double_well()):
        for _ in range(20):
            u, v = random_smooth_element(P, 256, rng), random_smooth_element(P, 256, rng)
            exact = gateaux_derivative(lag, u, v)
            h = 1e-5
            fd = (evaluate(lag, u + v * h) - evaluate(lag, u - v * h)) / (2 * h)
            worst = max(worst, abs(exact - fd) / abs(exact))
    assert record_criterion(7, worst <= 1e-6, f"max relative error over 40 pairs = {worst:.2e}")


def test_criterion_08_bvp():
    def sine(t):
        return np.sin(np.pi * t)

    errs, orth, energy = [], 0.0, 0.0
    for n in (32, 64, 128, 256):
        s = assemble(P, n, forward_map(P, sine, 8 * n, n))
        u = solve(s)
        errs.append(l2_error(u, sine))
        orth, energy = max(orth, galerkin_residual(s, u)), max(energy, energy_gap(s, u))
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    ok = errs[-1] <= 5e-2 and monotone and orth <= 1e-10 and energy <= 1e-10
    detail = f"L2 errors {', '.join(f'{e:.4f}' for e in errs)}; orthogonality {orth:.1e}; energy {energy:.1e}"
    assert record_criterion(8, ok, detail)


def test_criterion_09_direct_minimizer():
    rng = np.random.default_rng(9)
    finals = [norm(minimize_direct(dirichlet(), random_smooth_element(P, 128, rng) * 3.0, tol=1e-8).extremal) for _ in range(3)]
    bump = manufactured_bump(P)
    res = []
    for n in (128, 256, 512):
        f = forward_map(P, bump, 8 * n, n)
        res.append(minimize_direct(linear_forced(f), SpaceElement.zeros(P, n), tol=1e-10).el_residual)
    ratios = [a / b for a, b in zip(res, res[1:])]
    ok = max(finals) <= 1e-4 and min(ratios) >= 1.3
    assert record_criterion(9, ok, f"dirichlet max ||u||={max(finals):.1e}; EL residuals {', '.join(f'{r:.2e}' for r in res)}, min ratio {min(ratios):.2f}")


def test_criterion_10_noether():
    bump = manufactured_bump(P)
    sym = symmetry_from_catalog("tempered-translation", P)
    u512 = SpaceElement.from_callable(P, 512, bump)
    invariance = check_invariance(dirichlet(), sym, u512, (-1.0, 1.0)).max_deviation
    drift = {n: corollary_momentum(dirichlet(), SpaceElement.from_callable(P, n, bump)).relative_drift for n in (128, 256, 512)}
    decreasing = drift[128] > drift[256] > drift[512]
    classical = TemperedParams(1.0, 0.0)
    line = GridFunction.from_callable(classical, 64, lambda t: 0.3 + 2.5 * t)
    momentum = noether_constant(dirichlet(), symmetry_from_catalog("translation", classical), line).max_deviation
    ok = invariance <= 1e-6 and drift[512] <= 1e-2 and decreasing and momentum <= 1e-10
    detail = (
        f"invariance {invariance:.1e}; drift n=128/256/512 {drift[128]:.3f}/{drift[256]:.3f}/{drift[512]:.3f} "
        f"(needs <= 1e-2 and decreasing); classical momentum deviation {momentum:.1e}"
    )
    assert record_criterion(10, ok, detail)


def test_criterion_11_coherence():
    u = SpaceElement.from_callable(P, 256, manufactured_bump(P))
    c = coherence_diagram(dirichlet(), u)
    worst = max(c.same_path_defect["untempered"], c.same_path_defect["classical"])
    assert record_criterion(11, worst <= 1e-10, f"max same-path defect (alpha,0) and (1,0) = {worst:.1e}")


def test_criterion_12_mountain_pass():
    lag = power(4)
    geo = verify_geometry(lag, P, 128)
    geometry_ok = geo.found and geo.value_at_zero == 0.0 and geo.eta > 0 and geo.value_at_e < 0 and geo.scale <= 1e6
    base = find_critical_point(lag, geo.e, m=17, tol=1e-4)
    others = [
        find_critical_point(lag, geo.e, m=17, tol=1e-4, seed=1, perturbation=1.0),
        find_critical_point(lag, geo.e, m=17, tol=1e-4, seed=2, perturbation=1.0),
        find_critical_point(lag, geo.e, m=34, tol=1e-4),
    ]
    spread = max(abs(r.value - base.value) / base.value for r in others[:2])
    refine = abs(others[2].value - base.value) / base.value
    random_pair = abs(others[0].value - others[1].value) / max(others[0].value, others[1].value)
    ok = (
        geometry_ok
        and max(r.grad_norm for r in [base, *others]) <= 1e-4
        and base.value > 0
        and max(spread, random_pair, refine) <= 0.05
    )
    detail = f"eta={geo.eta:.3f}, critical value {base.value:.6f}, grad {base.grad_norm:.1e}, random-path spread {max(spread, random_pair):.1e}, m->2m {refine:.1e}"
    assert record_criterion(12, ok, detail)


def test_criterion_13_cli_determinism(tmp_path):
    out = tmp_path / "report.json"
    outputs = []
    for argv in (["ops-verify", "--n", "128"], ["mountain-pass", "--n", "64"]):
        texts = []
        for _ in range(2):
            cmd = [sys.executable, "-m", "tempvar", *argv, "--seed", "42", "--json", str(out)]
            subprocess.run(cmd, check=True, capture_output=True)
            texts.append(out.read_bytes())
            out.unlink()
        outputs.append(texts[0] == texts[1])
        assert json.loads(texts[0])["seed"] == 42
    assert record_criterion(13, all(outputs), f"byte-identical JSON for ops-verify and mountain-pass: {outputs}")
