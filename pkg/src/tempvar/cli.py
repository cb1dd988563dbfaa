"""Command-line front end: ``tempvar <command> [flags]``.

Exit codes: 0 success, 1 computation failure, 2 usage error.
Reports are JSON (sorted keys, no timestamps) written with ``--json``;
a one-line summary always goes to standard output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import bvp, identities, noether, operators, variational
from . import lagrangian as lagr
from . import mountain_pass as mp
from .expr import ExpressionError, parse
from .fnspace import SpaceElement, norm, random_smooth_element
from .grid import GridFunction, TemperedParams, read_csv, write_csv

COMMANDS = ("ops-verify", "ops-table", "bvp-solve", "bvp-converge", "minimize", "noether-check", "mountain-pass", "coherence")
OPERATOR_NAMES = ("left-integral", "right-integral", "left-caputo", "right-caputo", "left-rl", "right-rl")
# commands working in the function space need alpha in (1/2, 1) and sigma > 0
_SPACE_COMMANDS = set(COMMANDS) - {"ops-verify", "ops-table"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: float
    sigma: float
    a: float
    b: float
    n: int
    lagrangian: str
    symmetry: str
    eta: str | None
    f: str | None
    u_star: str
    trajectory: str
    operator: str
    power: float
    knots: int
    out: str | None
    json: str | None
    tol: float | None
    max_iter: int
    seed: int

    @property
    def params(self) -> TemperedParams:
        return TemperedParams(self.alpha, self.sigma, self.a, self.b)

    def to_dict(self):
        return asdict(self)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=0.75, help="order, in (0,1) (in (1/2,1) for space commands)")
    common.add_argument("--sigma", type=float, default=1.0, help="tempering rate")
    common.add_argument("--a", type=float, default=0.0, help="left end of the interval")
    common.add_argument("--b", type=float, default=1.0, help="right end of the interval")
    common.add_argument("--n", type=int, default=256, help="number of grid intervals")
    common.add_argument("--lagrangian", default=None, help="catalog name or expression in x, y, t")
    common.add_argument("--symmetry", default="tempered-translation", help="catalog name or expression in s, x, t")
    common.add_argument("--eta", default=None, help="generator expression in x, t for a custom symmetry")
    common.add_argument("--f", default=None, help="forcing: CSV path (t,value) or expression in t")
    common.add_argument("--u-star", dest="u_star", default="sin(pi*(t-a)/(b-a))", help="prescribed solution for bvp-converge")
    common.add_argument("--trajectory", choices=("minimizer", "manufactured"), default="minimizer")
    common.add_argument("--operator", choices=OPERATOR_NAMES, default="left-caputo")
    common.add_argument("--power", type=float, default=4.0, help="exponent p of the power Lagrangian")
    common.add_argument("--knots", type=int, default=17, help="knots on the mountain-pass path")
    common.add_argument("--out", default=None, help="CSV output path")
    common.add_argument("--json", default=None, help="JSON report path")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--max-iter", dest="max_iter", type=int, default=500)
    common.add_argument("--seed", type=int, default=42)
    p = argparse.ArgumentParser(prog="tempvar", description="Tempered fractional variational calculus toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    for c in COMMANDS:
        sub.add_parser(c, parents=[common])
    return p


def _default_lagrangian(command):
    return {"mountain-pass": "power", "minimize": "dirichlet"}.get(command, "dirichlet")


def _check_lagrangian(text):
    if text in lagr.CATALOG:
        return
    try:
        parse(text, ("x", "y", "t"))
    except ExpressionError as exc:
        raise UsageError(f"--lagrangian: not a catalog name ({', '.join(lagr.CATALOG)}) or expression: {exc}") from None


def _check_symmetry(text, eta):
    if text not in noether.SYMMETRIES:
        try:
            parse(text, ("s", "x", "t"))
        except ExpressionError as exc:
            raise UsageError(f"--symmetry: not a catalog name ({', '.join(noether.SYMMETRIES)}) or expression: {exc}") from None
    if eta is not None:
        try:
            parse(eta, ("x", "t"))
        except ExpressionError as exc:
            raise UsageError(f"--eta: {exc}") from None


def _check_function_of_t(flag, text):
    if text is None or Path(text).is_file():
        return
    try:
        parse(text, ("t", "a", "b"))
    except ExpressionError as exc:
        raise UsageError(f"{flag}: neither an existing CSV file nor an expression in t: {exc}") from None


def parse_args(argv) -> RunConfig:
    """Parse and validate; raises :class:`UsageError` naming the offending flag.

    Malformed flags are reported by argparse itself, which exits with status 2.
    """
    ns = _parser().parse_args(list(argv))
    cfg = RunConfig(
        command=ns.command,
        alpha=ns.alpha,
        sigma=ns.sigma,
        a=ns.a,
        b=ns.b,
        n=ns.n,
        lagrangian=ns.lagrangian or _default_lagrangian(ns.command),
        symmetry=ns.symmetry,
        eta=ns.eta,
        f=ns.f,
        u_star=ns.u_star,
        trajectory=ns.trajectory,
        operator=ns.operator,
        power=ns.power,
        knots=ns.knots,
        out=ns.out,
        json=ns.json,
        tol=ns.tol,
        max_iter=ns.max_iter,
        seed=ns.seed,
    )
    for name in ("alpha", "sigma", "a", "b"):
        if not math.isfinite(getattr(cfg, name)):
            raise UsageError(f"--{name} must be finite")
    if cfg.command in _SPACE_COMMANDS:
        if not 0.5 < cfg.alpha < 1.0:
            raise UsageError(f"--alpha must lie in (1/2, 1) for {cfg.command}, got {cfg.alpha}")
        if not cfg.sigma > 0.0:
            raise UsageError(f"--sigma must be > 0 for {cfg.command}, got {cfg.sigma}")
    else:
        if not 0.0 < cfg.alpha < 1.0:
            raise UsageError(f"--alpha must lie in (0, 1), got {cfg.alpha}")
        if cfg.sigma < 0.0:
            raise UsageError(f"--sigma must be >= 0, got {cfg.sigma}")
    if not cfg.a < cfg.b:
        raise UsageError("--a must be smaller than --b")
    if cfg.n < 8:
        raise UsageError("--n must be at least 8")
    if cfg.tol is not None and not cfg.tol > 0:
        raise UsageError("--tol must be positive")
    if cfg.max_iter < 0:
        raise UsageError("--max-iter must be >= 0")
    if cfg.knots < 8:
        raise UsageError("--knots must be at least 8")
    if cfg.power <= 1.0:
        raise UsageError("--power must exceed 1")
    _check_lagrangian(cfg.lagrangian)
    _check_symmetry(cfg.symmetry, cfg.eta)
    _check_function_of_t("--f", cfg.f)
    _check_function_of_t("--u-star", cfg.u_star)
    if cfg.lagrangian == "linear-forced" and cfg.f is None:
        raise UsageError("--f is required for the linear-forced Lagrangian")
    if cfg.command == "bvp-converge" and (cfg.n < 32 or cfg.n & (cfg.n - 1)):
        raise UsageError("--n must be a power of two >= 32 for bvp-converge")
    return cfg


# -- helpers -----------------------------------------------------------------


def _function_of_t(cfg, text):
    if Path(text).is_file():
        t, v = read_csv(text)
        return lambda s: np.interp(s, t, v)
    e = parse(text, ("t", "a", "b"))
    return lambda s: e(t=s, a=np.full(np.shape(s), cfg.a), b=np.full(np.shape(s), cfg.b))


def _forcing(cfg):
    return GridFunction.from_callable(cfg.params, cfg.n, _function_of_t(cfg, cfg.f if cfg.f is not None else "1"))


def _lagrangian(cfg):
    name = cfg.lagrangian
    if name in lagr.CATALOG:
        f = _forcing(cfg) if name == "linear-forced" else None
        return lagr.from_catalog(name, f=f, p=cfg.power)
    return lagr.from_expression(name)


def _symmetry(cfg, params):
    if cfg.symmetry in noether.SYMMETRIES and cfg.eta is None:
        return noether.symmetry_from_catalog(cfg.symmetry, params)
    return noether.symmetry_from_expressions(cfg.symmetry, cfg.eta, params)


def _clean(x):
    """Make a structure JSON-safe: numpy scalars to floats, non-finite to None."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


class ComputationFailure(Exception):
    pass


# -- commands ----------------------------------------------------------------


def _ops_verify(cfg, outputs):
    p = cfg.params
    n = cfg.n
    u_fn = lambda t: np.sin(np.pi * (t - p.a) / p.length)  # noqa: E731
    comp = identities.verify_composition(GridFunction.from_callable(p, n, u_fn))
    coarse = identities.verify_composition(GridFunction.from_callable(p, n // 2, u_fn))
    ratios = {k: (coarse.to_dict()[k] / v if v > 0 else math.inf) for k, v in comp.to_dict().items()}
    bump = lambda t: np.sin(np.pi * (t - p.a) / p.length) ** 2  # noqa: E731
    other = lambda t: ((t - p.a) * (p.b - t)) * np.exp(t - p.a)  # noqa: E731
    ibp = identities.verify_integration_by_parts(GridFunction.from_callable(p, n, bump), GridFunction.from_callable(p, n, other))
    ann = operators.left_caputo_derivative(GridFunction.from_callable(p, n, lambda t: np.exp(-p.sigma * (t - p.a))))
    bound = identities.integral_bound_constant(p)
    m = operators.operator_matrix(operators.OperatorKind("left", "rl_integral", p.alpha), p, n)
    l2 = identities.discrete_l2_operator_norm(m.entries, p.length / n, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    sup_ratio = 0.0
    for _ in range(20):
        v = GridFunction(p, rng.uniform(-1.0, 1.0, n + 1))
        iv = operators.left_tempered_integral(v, p.alpha).values
        sup_ratio = max(sup_ratio, np.max(np.abs(iv)) / (bound * np.max(np.abs(v.values))))
    mirror = identities.mirror_defect(GridFunction.from_callable(p, n, lambda t: np.cos(3 * t) + t))
    checks = {
        "composition": comp.max() <= 5e-2 and min(ratios.values()) >= math.sqrt(2.0),
        "integration_by_parts": max(ibp.derivative_residual, ibp.integral_residual) <= 1e-3,
        "annihilation": float(np.max(np.abs(ann.values))) <= 1e-12,
        "l2_bound": l2 <= bound * 1.02,
        "sup_bound": sup_ratio <= 1.0 + 1e-12,
        "mirror": max(mirror.values()) <= 1e-12,
    }
    result = {
        "composition": {"residuals": comp.to_dict(), "ratio_per_doubling": ratios},
        "integration_by_parts": ibp.to_dict(),
        "annihilation_max": float(np.max(np.abs(ann.values))),
        "l2_operator_norm": l2,
        "l2_bound": bound,
        "sup_ratio": sup_ratio,
        "mirror_defect": mirror,
        "checks": checks,
        "all_pass": all(checks.values()),
    }
    summary = f"ops-verify: {sum(checks.values())}/{len(checks)} checks passed"
    return result, summary, 0 if result["all_pass"] else 1


def _operator_kind(name, alpha):
    side, fam = name.split("-")
    family = {"integral": "rl_integral", "caputo": "caputo_derivative", "rl": "rl_derivative"}[fam]
    return operators.OperatorKind(side, family, alpha if family == "rl_integral" else None)


def _ops_table(cfg, outputs):
    p = cfg.params
    u = GridFunction.from_callable(p, cfg.n, _function_of_t(cfg, cfg.f or "sin(pi*(t-a)/(b-a))"))
    table = {"t": u.t, "u": u.values}
    for name in OPERATOR_NAMES:
        table[name] = operators.apply(_operator_kind(name, p.alpha), u).values
    if cfg.out:
        outputs.append(cfg.out)
        operators.operator_matrix(_operator_kind(cfg.operator, p.alpha), p, cfg.n).to_csv(cfg.out)
    return {"table": table, "matrix": cfg.operator}, f"ops-table: {len(OPERATOR_NAMES)} operators on n={cfg.n}", 0


def _bvp_solve(cfg, outputs):
    p = cfg.params
    f = _forcing(cfg)
    system = bvp.assemble(p, cfg.n, f)
    u = bvp.solve(system)
    if cfg.out:
        outputs.append(cfg.out)
        write_csv(cfg.out, u.u)
    res = {
        "galerkin_residual": bvp.galerkin_residual(system, u),
        "energy_gap": bvp.energy_gap(system, u),
        "norm": norm(u),
        "max_abs": float(np.max(np.abs(u.values))),
    }
    return res, f"bvp-solve: n={cfg.n} norm={res['norm']:.6g} galerkin residual={res['galerkin_residual']:.2e}", 0


def _bvp_converge(cfg, outputs):
    ns = []
    k = 32
    while k <= cfg.n:
        ns.append(k)
        k *= 2
    rows = bvp.convergence_study(cfg.params, _function_of_t(cfg, cfg.u_star), ns)
    errs = [r["l2_error"] for r in rows]
    monotone = all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    return {"rows": rows, "monotone": monotone}, f"bvp-converge: final l2 error {errs[-1]:.3e}, monotone={monotone}", 0


def _minimize(cfg, outputs):
    p = cfg.params
    lag = _lagrangian(cfg)
    u0 = random_smooth_element(p, cfg.n, np.random.default_rng(cfg.seed))
    rep = variational.minimize_direct(lag, u0, tol=cfg.tol or 1e-8, max_iter=cfg.max_iter)
    if cfg.out:
        outputs.append(cfg.out)
        write_csv(cfg.out, rep.extremal.u)
    code = 0 if rep.converged else 1
    return rep.to_json(), f"minimize: {rep.message} after {rep.iterations} iterations, J={rep.value:.6g}, grad={rep.grad_norm:.2e}", code


def _trajectory(cfg, lag):
    p = cfg.params
    if cfg.trajectory == "manufactured":
        bump = bvp.manufactured_bump(p)
        return SpaceElement.from_callable(p, cfg.n, bump)
    u0 = random_smooth_element(p, cfg.n, np.random.default_rng(cfg.seed))
    return variational.minimize_direct(lag, u0, tol=cfg.tol or 1e-8, max_iter=cfg.max_iter).extremal


def _noether_check(cfg, outputs):
    p = cfg.params
    lag = _lagrangian(cfg)
    sym = _symmetry(cfg, p)
    u = _trajectory(cfg, lag)
    res = {
        "invariance": noether.check_invariance(lag, sym, u).to_dict(),
        "necessary_condition_residual": noether.necessary_condition_residual(lag, sym, u),
        "noether": noether.noether_constant(lag, sym, u).to_dict(),
    }
    if lag.x_independent:
        res["corollary"] = noether.corollary_momentum(lag, u).to_dict()
    if cfg.out:
        outputs.append(cfg.out)
        write_csv(cfg.out, noether.noether_constant(lag, sym, u).values)
    nd = res["noether"]
    return res, f"noether-check: mean={nd['mean']:.6g} relative drift={nd['relative_drift']:.3g}", 0


def _mountain_pass(cfg, outputs):
    p = cfg.params
    lag = _lagrangian(cfg)
    geo = mp.verify_geometry(lag, p, cfg.n, seed=cfg.seed)
    if not geo.found:
        raise ComputationFailure(geo.message)
    rep = mp.find_critical_point(lag, geo.e, m=cfg.knots, tol=cfg.tol or 1e-4, max_iter=cfg.max_iter)
    res = {
        "geometry": geo.to_dict(),
        "critical_value": rep.value,
        "grad_norm": rep.grad_norm,
        "iterations": rep.iterations,
        "path_values": rep.extras["path_values"],
        "morse_index": rep.extras["morse_index"],
        "converged": rep.converged,
        "message": rep.message,
    }
    if cfg.out:
        outputs.append(cfg.out)
        _write_path_csv(cfg.out, rep.path)
    code = 0 if rep.converged else 1
    return res, f"mountain-pass: critical value {rep.value:.6g}, grad norm {rep.grad_norm:.2e} ({rep.message})", code


def _write_path_csv(path, state):
    knots = state.knots
    cols = np.column_stack([knots[0].t] + [k.values for k in knots])
    header = "t," + ",".join(f"knot_{i}" for i in range(len(knots)))
    np.savetxt(path, cols, delimiter=",", header=header, comments="", fmt="%.17g")


def _coherence(cfg, outputs):
    lag = _lagrangian(cfg)
    u = _trajectory(cfg, lag)
    sym = None if (cfg.symmetry == "tempered-translation" and cfg.eta is None) else _symmetry(cfg, cfg.params)
    rep = noether.coherence_diagram(lag, u, sym)
    worst = max(rep.same_path_defect.values())
    return rep.to_dict(), f"coherence: max same-path defect {worst:.2e}", 0 if worst <= 1e-10 else 1


_RUNNERS = {
    "ops-verify": _ops_verify,
    "ops-table": _ops_table,
    "bvp-solve": _bvp_solve,
    "bvp-converge": _bvp_converge,
    "minimize": _minimize,
    "noether-check": _noether_check,
    "mountain-pass": _mountain_pass,
    "coherence": _coherence,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit code. Outputs are removed on failure."""
    outputs = []
    threads = os.environ.get("TEMPVAR_THREADS")
    limit = int(threads) if threads and threads.isdigit() and int(threads) > 0 else None
    try:
        with threadpool_limits(limits=limit):
            result, summary, code = _RUNNERS[cfg.command](cfg, outputs)
    except (ComputationFailure, ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError, KeyError) as exc:
        _remove(outputs)
        print(f"{cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    if cfg.json:
        doc = {"command": cfg.command, "config": cfg.to_dict(), "seed": cfg.seed, "result": result}
        text = json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False)
        Path(cfg.json).write_text(text + "\n", encoding="utf-8")
    if code != 0:
        _remove(outputs)
    print(summary)
    return code


def _remove(paths):
    for p in paths:
        try:
            os.remove(p)
        except FileNotFoundError:
            pass


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
