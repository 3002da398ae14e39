"""``fracdelta`` command line: powfun, solve, gronwall, depend, verify.

Exit status: 0 success, 1 numerical failure (non-convergence, truncation,
bound violation, failed check), 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import verify as V
from .config import ConfigError, get, load_config, parse_function, parse_grid, parse_orders, parse_rhs
from .errors import (
    DomainError,
    FracDeltaError,
    HypothesisError,
    NonConvergenceError,
    RHSEvaluationError,
    TruncationError,
)
from .fracops import max_semigroup_residual, power_table
from .gronwall import GronwallInput, fixed_point, gronwall_bound
from .solver import CauchyProblem, DependenceInput, check_lipschitz, dependence_certify, picard_solve
from .timescale import ScaleKind

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

INTERPRETATION_NOTE = (
    "note = the integral form is u = w h_{alpha-1}(t,t0) + I^alpha f(.,u); "
    "the unknown enters the integrand, and w is the primitive datum"
)


def _positive(cfg, key, default, cast=float):
    value = get(cfg, key, cast, default)
    if not value > 0:
        raise ConfigError(f"{key} must be positive")
    return value


def _order_label(alpha: float) -> str:
    return repr(float(alpha))


def _write(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text)


def _require_config(args) -> dict:
    if args.config is None:
        raise ConfigError(f"{args.command} needs --config")
    return load_config(args.config)


def _build_problem(cfg: dict, grid, suffix: str = "") -> CauchyProblem:
    rhs = parse_rhs(get(cfg, "rhs" + suffix, str), cfg, grid)
    L = get(cfg, "L", float, rhs.lipschitz if rhs.lipschitz is not None else None)
    return CauchyProblem(
        alpha=get(cfg, "alpha", float),
        f=rhs.f,
        w=get(cfg, "w" + suffix, float),
        grid=grid,
        L=L,
        eta=get(cfg, "eta", float),
        t0_index=get(cfg, "t0_index", int, 0),
        representation=get(cfg, "representation", str, "rl-type"),
    )


def _solver_notes(problem: CauchyProblem) -> list:
    notes = []
    if problem.alpha < 1 and problem.eta > 1:
        notes.append(
            "note = alpha < 1 with eta > 1: the observed contraction factor may exceed L/eta"
        )
    return notes


# subcommands -------------------------------------------------------------------


def run_powfun(args, out: Path) -> int:
    cfg = _require_config(args)
    grid = parse_grid(get(cfg, "grid", str), cfg)
    orders = parse_orders(cfg)
    tables = [(a, power_table(grid, a)) for a in orders]
    lines = [f"grid = {grid.kind.value}[{len(grid)}]"]
    status = EXIT_OK
    for a, table in tables:
        _write(out, f"powfun_alpha_{_order_label(a)}.csv", table.to_csv())
        lines.append(f"alpha = {_order_label(a)} written")
    if args.check:
        for a, _ in tables:
            if not a > 0 or len(grid) < 2:
                line = f"residual alpha={_order_label(a)} not applicable (needs alpha > 0 and two points)"
                lines.append(line)
                print(line)
                continue
            for k in (1, 2, 3):
                r = max_semigroup_residual(grid, a, k)
                ok = r <= 1e-10
                status = status if ok else EXIT_NUMERIC
                line = f"residual alpha={_order_label(a)} k={k} max={r!r} {'ok' if ok else 'exceeds 1e-10'}"
                lines.append(line)
                print(line)
    _write(out, "summary.txt", "\n".join(lines) + "\n")
    return status


def run_solve(args, out: Path) -> int:
    cfg = _require_config(args)
    grid = parse_grid(get(cfg, "grid", str), cfg)
    problem = _build_problem(cfg, grid)
    tol = _positive(cfg, "tol", 1e-10)
    max_iter = _positive(cfg, "max_iter", 1000, int)
    notes = _solver_notes(problem)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        observed = check_lipschitz(problem, seed=args.seed)
        try:
            result = picard_solve(problem, tol, max_iter)
            status = EXIT_OK
        except NonConvergenceError as exc:
            result = exc.result
            status = EXIT_NUMERIC
    for w in caught:
        if "Lipschitz" in str(w.message):
            notes.append(f"warning = {w.message}")
    if args.verbose:
        notes.append(INTERPRETATION_NOTE)
    summary = result.summary() + f"lipschitz_observed = {observed!r}\n" + "".join(n + "\n" for n in notes)
    _write(out, "solution.csv", result.solution.to_csv())
    _write(out, "summary.txt", summary)
    print(summary, end="")
    return status


def run_gronwall(args, out: Path) -> int:
    cfg = _require_config(args)
    grid = parse_grid(get(cfg, "grid", str), cfg)
    u = parse_function(get(cfg, "u", str), grid, cfg)
    v = parse_function(get(cfg, "v", str), grid, cfg)
    alpha = get(cfg, "alpha", float)
    B = get(cfg, "B", float, float(np.max(v.values)))
    inp = GronwallInput(u, v, alpha, B, get(cfg, "t0_index", int, 0))
    series_tol = _positive(cfg, "series_tol", 1e-12)
    max_terms = _positive(cfg, "max_terms", 500, int)
    tol = _positive(cfg, "tol", 1e-8)
    y = parse_function(cfg["y"], grid, cfg) if "y" in cfg else fixed_point(inp)
    try:
        report = gronwall_bound(inp, series_tol, max_terms)
        status = EXIT_OK
    except TruncationError as exc:
        report = exc.report
        status = EXIT_NUMERIC
    report = report.compare(y, tol)
    if not report.verdict.passed:
        status = EXIT_NUMERIC
    _write(out, "bound.csv", report.to_csv())
    _write(out, "summary.txt", report.summary())
    print(report.summary(), end="")
    return status


def run_depend(args, out: Path) -> int:
    cfg = _require_config(args)
    grid = parse_grid(get(cfg, "grid", str), cfg)
    a = _build_problem(cfg, grid)
    bar = dict(cfg)
    bar.setdefault("w_bar", cfg["w"] if "w" in cfg else "")
    bar.setdefault("rhs_bar", cfg["rhs"] if "rhs" in cfg else "")
    b = _build_problem(bar, grid, "_bar")
    series_tol = _positive(cfg, "series_tol", 1e-12)
    max_terms = _positive(cfg, "max_terms", 2000, int)
    tol = _positive(cfg, "tol", 1e-8 + series_tol)
    report = dependence_certify(DependenceInput(a, b), get(cfg, "tol_solve", float, 1e-12), series_tol, max_terms=max_terms, tol=tol)
    _write(out, "dependence.csv", report.to_csv())
    _write(out, "summary.txt", report.summary())
    print(report.summary(), end="")
    return EXIT_OK if report.verdict.passed else EXIT_NUMERIC


def run_verify(args, out: Path) -> int:
    cfg = load_config(args.config) if args.config else {}
    user_grid = parse_grid(cfg["grid"], cfg) if "grid" in cfg else None
    instances = args.instances if args.instances is not None else get(cfg, "instances", int, V.GRONWALL_INSTANCES)
    if instances < 1:
        raise ConfigError("--instances must be at least 1")
    rows = V.run_suite(args.seed, instances)
    if user_grid is not None and user_grid.kind is ScaleKind.Arbitrary:
        worst = max(V.recursion_relative_error(user_grid, k) for k in range(5))
        rows.append(V.CheckRow("integer-order recursion on configured grid", 5, int(worst > 1e-10), worst, "rel <= 1e-10"))
    elif user_grid is not None:
        res = max(max_semigroup_residual(user_grid, 1.0, k) for k in (1, 2, 3))
        rows.append(V.CheckRow("semigroup identity alpha=1 on configured grid", 3, int(res > 1e-8), res, "<= 1e-8"))
    table = V.rows_to_table(rows)
    passed = all(r.passed for r in rows)
    _write(out, "verify.csv", V.rows_to_csv(rows))
    _write(out, "summary.txt", f"seed = {args.seed}\ninstances = {instances}\n{table}verdict = {'pass' if passed else 'fail'}\n")
    print(table, end="")
    return EXIT_OK if passed else EXIT_NUMERIC


COMMANDS = {
    "powfun": run_powfun,
    "solve": run_solve,
    "gronwall": run_gronwall,
    "depend": run_depend,
    "verify": run_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdelta", description="Fractional calculus on discretized time scales.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--instances", type=int, default=None, help="random Gronwall instances for verify")
    parser.add_argument("--check", action="store_true", help="powfun: report semigroup residuals")
    parser.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, args.out)
    except (ConfigError, OSError, HypothesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, TruncationError, RHSEvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, FracDeltaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
