"""Seeded invariant suite run by ``fracdelta verify``.

Each check returns a :class:`CheckRow`; the suite passes iff every row
does.  Random instances come from ``numpy.random.default_rng`` seeded with
``(seed, check_id)`` so that checks are reproducible independently.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fracops import (
    caputo_derivative,
    max_semigroup_residual,
    power_function,
    semigroup_residual,
    semigroup_residual_matrix,
)
from .gronwall import GronwallInput, fixed_point, gronwall_bound, verify_dominance
from .solver import CauchyProblem, DependenceInput, dependence_certify, picard_solve
from .timescale import GridFunction, ScaleKind, TimeScaleGrid, weighted_metric

GRONWALL_INSTANCES = 100
SOLVER_INSTANCES = 25
CONTRACTION_RATIOS = (0.25, 0.5, 0.9)


@dataclass(frozen=True)
class CheckRow:
    name: str
    instances: int
    failures: int
    worst: float
    threshold: str
    first_failure: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _rng(seed: int, check_id: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(check_id)])


# instance generators -----------------------------------------------------------


def random_gronwall_instance(rng: np.random.Generator, B: float = 2.0) -> GronwallInput:
    """Nonnegative u, nondecreasing v <= B, alpha in {0.5, 1}, lattice of at most 32 points."""
    npts = int(rng.integers(4, 33))
    h = float(rng.choice([0.05, 0.1, 0.125, 0.2, 0.25, 0.5]))
    grid = TimeScaleGrid.lattice(0.0, (npts - 1) * h, h)
    alpha = float(rng.choice([0.5, 1.0]))
    u = GridFunction(grid, rng.uniform(0.0, 1.0, npts))
    v = GridFunction(grid, np.sort(rng.uniform(0.0, B, npts)))
    return GronwallInput(u, v, alpha, B)


def _random_rhs(rng: np.random.Generator, L: float):
    kind = int(rng.integers(0, 4))
    s = float(rng.choice([-1.0, 1.0]))
    c = float(rng.normal())
    if kind == 0:
        return (lambda t, u: s * L * u), f"linear({s * L!r})"
    if kind == 1:
        return (lambda t, u: s * L * u + c), f"affine({s * L!r},{c!r})"
    if kind == 2:
        return (lambda t, u: L * np.sin(u) + c * np.cos(t)), f"{L!r}*sin(u)+{c!r}*cos(t)"
    return (lambda t, u: s * L * np.tanh(u) + c), f"{s * L!r}*tanh(u)+{c!r}"


def _random_grid(rng: np.random.Generator, alpha: float, continuous_ok: bool = True) -> TimeScaleGrid:
    if continuous_ok and rng.random() < 0.5:
        n = int(rng.integers(8, 64))
        return TimeScaleGrid.uniform(0.0, float(rng.uniform(0.5, 3.0)), n)
    npts = int(rng.integers(4, 65))
    h = float(rng.choice([0.05, 0.1, 0.25, 0.5, 1.0]))
    return TimeScaleGrid.lattice(0.0, (npts - 1) * h, h)


def random_solver_problem(rng: np.random.Generator, ratio: float) -> tuple[CauchyProblem, str]:
    """A problem with ``L/eta = ratio``.

    For ``alpha < 1`` the weight is drawn from ``eta <= 1``, the range in
    which ``L/eta`` bounds the contraction factor of the Picard operator in
    the weighted norm; for ``alpha = 1`` any ``eta`` in ``[0.5, 4]``.
    """
    alpha = float(rng.choice([0.5, 0.8, 1.0]))
    eta = float(rng.uniform(0.5, 4.0)) if alpha == 1.0 else float(rng.uniform(0.25, 1.0))
    L = ratio * eta
    f, label = _random_rhs(rng, L)
    grid = _random_grid(rng, alpha)
    w = float(rng.normal())
    desc = f"alpha={alpha} eta={eta:.4g} L={L:.4g} rhs={label} grid={grid.kind.value}[{len(grid)}]"
    return CauchyProblem(alpha, f, w, grid, L, eta), desc


def random_dependence_pair(rng: np.random.Generator) -> tuple[DependenceInput, str]:
    """Perturbed pair with ``L/eta < 1``; fractional orders on lattices, ``alpha = 1`` on either kind."""
    alpha = float(rng.choice([0.3, 0.5, 0.8, 1.0]))
    grid = _random_grid(rng, alpha, continuous_ok=(alpha == 1.0))
    eta = float(rng.uniform(0.25, 1.0))
    L = float(rng.choice(CONTRACTION_RATIOS)) * eta
    f, label = _random_rhs(rng, L)
    mode = int(rng.integers(0, 3))
    dw = float(rng.normal(scale=0.2)) if mode in (0, 2) else 0.0
    eps = float(rng.normal(scale=0.05)) if mode in (1, 2) else 0.0
    w = float(rng.normal())

    def fbar(t, u, f=f, eps=eps):
        return f(t, u) + eps * np.cos(t)

    a = CauchyProblem(alpha, f, w, grid, L, eta)
    b = CauchyProblem(alpha, fbar, w + dw, grid, L, eta)
    desc = f"alpha={alpha} L={L:.4g} dw={dw:.3g} eps={eps:.3g} rhs={label} grid={grid.kind.value}[{len(grid)}]"
    return DependenceInput(a, b), desc


# checks ---------------------------------------------------------------------------


def check_semigroup_integer() -> CheckRow:
    grid = TimeScaleGrid.lattice(0, 10, 1)
    res = [max_semigroup_residual(grid, a, k) for a in (1.0, 2.0) for k in (1, 2, 3)]
    worst = max(res)
    return CheckRow("semigroup identity, integer orders, lattice(0,10,1)", len(res), sum(r > 1e-10 for r in res), worst, "<= 1e-10")


def check_semigroup_fractional() -> CheckRow:
    grid = TimeScaleGrid.lattice(0, 10, 1)
    cases = [(a, k) for a in (0.3, 0.5, 0.8) for k in (1, 2, 3)]
    res = [max_semigroup_residual(grid, a, k) for a, k in cases]
    bad = [c for c, r in zip(cases, res) if r > 1e-8]
    first = f"alpha={bad[0][0]} k={bad[0][1]}" if bad else ""
    return CheckRow("semigroup identity, fractional orders, lattice(0,10,1)", len(res), len(bad), max(res), "<= 1e-8", first)


def check_semigroup_inequality() -> CheckRow:
    grid = TimeScaleGrid.lattice(0, 31, 1)
    worst = -math.inf
    bad = []
    n = 0
    for a in (0.3, 0.5, 0.8):
        for k in range(1, 40):
            lhs, rhs = semigroup_residual_matrix(grid, a, k)
            excess = float(np.max(lhs - rhs))
            worst = max(worst, excess)
            n += 1
            if excess > 1e-12:
                bad.append((a, k))
    first = f"alpha={bad[0][0]} k={bad[0][1]}" if bad else ""
    return CheckRow("composition inequality LHS <= RHS, fractional, lattice(0,31,1)", n, len(bad), worst, "<= 1e-12", first)


def check_semigroup_refinement() -> CheckRow:
    r500 = semigroup_residual(TimeScaleGrid.uniform(0, 1, 500), 0.5, 1, 500, 0)
    r1000 = semigroup_residual(TimeScaleGrid.uniform(0, 1, 1000), 0.5, 1, 1000, 0)
    ratio = r1000 / r500
    ok = 0.4 <= ratio <= 0.6
    return CheckRow("semigroup residual halves under refinement, uniform(0,1,500->1000)", 1, 0 if ok else 1, ratio, "ratio in [0.4, 0.6]")


def random_arbitrary_grid(rng: np.random.Generator, npts: int = 12) -> TimeScaleGrid:
    pts = np.cumsum(rng.uniform(0.05, 1.0, npts))
    return TimeScaleGrid.from_points(pts - pts[0], ScaleKind.Arbitrary)


def recursion_relative_error(grid: TimeScaleGrid, k: int) -> float:
    """Largest relative gap between ``h_{k+1}(t_i, t_j)`` and the delta integral of ``h_k(., t_j)``."""
    worst = 0.0
    mu = grid.mu
    for j in range(len(grid)):
        for i in range(j, len(grid)):
            integral = sum(power_function(grid, k, l, j) * mu[l] for l in range(j, i))
            direct = power_function(grid, k + 1, i, j)
            scale = max(abs(integral), abs(direct), 1e-300)
            if integral != direct:
                worst = max(worst, abs(integral - direct) / scale)
    return worst


def closed_form_relative_error(grid: TimeScaleGrid, k: int) -> float:
    """Largest relative gap between ``h_k(t_i, t_j)`` and ``e_k(mu_j, ..., mu_{i-1})``.

    On a discrete scale the recursion unrolls to the elementary symmetric
    polynomial of the graininesses between the two points.
    """
    worst = 0.0
    mu = grid.mu
    for j in range(len(grid)):
        for i in range(j, len(grid)):
            # coefficients of prod (x + mu_l) are the elementary symmetric polynomials
            coeffs = np.poly(-mu[j:i]) if i > j else np.array([1.0])
            exact = float(coeffs[k]) if k < coeffs.size else 0.0
            got = power_function(grid, k, i, j)
            if got != exact:
                worst = max(worst, abs(got - exact) / max(abs(exact), abs(got)))
    return worst


def check_power_recursion(seed: int, trials: int = 5) -> CheckRow:
    rng = _rng(seed, 5)
    worst = 0.0
    fails = 0
    n = 0
    grids = [random_arbitrary_grid(rng) for _ in range(trials)] + [TimeScaleGrid.lattice(0, 3.3, 0.3)]
    for grid in grids:
        for k in range(0, 5):
            e = max(recursion_relative_error(grid, k), closed_form_relative_error(grid, k))
            worst = max(worst, e)
            fails += e > 1e-10
            n += 1
    return CheckRow("integer orders k <= 4: closed form and recursion h_{k+1} = int h_k", n, fails, worst, "rel <= 1e-10")


def check_power_gamma() -> CheckRow:
    v = power_function(TimeScaleGrid.uniform(0, 1, 1000), 0.5, 1000, 0)
    err = abs(v - 1.128379)
    return CheckRow("h_{1/2}(1,0) on ContinuousApprox", 1, int(err > 1e-5), err, "|h - 1.128379| <= 1e-5")


def check_gronwall_classical() -> CheckRow:
    fails = 0
    worst = 0.0
    grid = TimeScaleGrid.uniform(0, 1, 1000)
    for a, c in ((1.0, 1.0), (2.0, 0.5), (0.5, 2.0)):
        inp = GronwallInput(GridFunction.constant(grid, a), GridFunction.constant(grid, c), 1.0, c)
        rel = abs(gronwall_bound(inp, 1e-12, 200).bound.values[-1] / (a * math.exp(c)) - 1)
        worst = max(worst, rel)
        fails += rel > 0.01
    lat = TimeScaleGrid.lattice(0, 5, 1)
    inp = GronwallInput(GridFunction.constant(lat, 1.0), GridFunction.constant(lat, 1.0), 1.0, 1.0)
    y = fixed_point(inp)
    b = gronwall_bound(inp, 1e-12, 200).bound.values
    err = float(np.max(np.abs(b - y.values)))
    fails += err > 1e-8
    return CheckRow("classical reduction alpha=1 (a e^c within 1%, 2^t to 1e-8)", 4, fails, max(worst, err), "rel 1e-2 / abs 1e-8")


def check_gronwall_dominance(seed: int, instances: int) -> CheckRow:
    rng = _rng(seed, 8)
    fails = []
    worst = math.inf
    for n in range(instances):
        inp = random_gronwall_instance(rng)
        y = fixed_point(inp, 1e-12)
        report = gronwall_bound(inp, 1e-14, 5000)
        verdict = verify_dominance(inp, y, report, 1e-8)
        worst = min(worst, verdict.min_slack)
        if not verdict.passed:
            fails.append(n)
    first = f"instance {fails[0]} (seed {seed})" if fails else ""
    return CheckRow("Gronwall dominance on random instances", instances, len(fails), worst, "y <= bound + 1e-8", first)


def check_solver_oracles(seed: int, instances: int) -> CheckRow:
    rng = _rng(seed, 9)
    worst = 0.0
    fails = []
    for n in range(instances):
        npts = int(rng.integers(3, 65))
        h = float(rng.choice([0.1, 0.25, 0.5, 1.0]))
        grid = TimeScaleGrid.lattice(0, (npts - 1) * h, h)
        lam = float(rng.uniform(-1.0, 1.0))
        w = float(rng.normal())
        eta = 2.0 * abs(lam) + 0.5
        problem = CauchyProblem(1.0, lambda t, u: lam * u, w, grid, abs(lam), eta)
        res = picard_solve(problem, absolute_tolerance(problem, 1e-13), 1000)
        exact = w * np.concatenate([[1.0], np.cumprod(1.0 + lam * grid.mu[:-1])])
        err = float(np.max(np.abs(res.solution.values - exact) / np.maximum(1.0, np.abs(exact))))
        worst = max(worst, err)
        if err > 1e-10:
            fails.append(n)
    grid = TimeScaleGrid.uniform(0, 1, 1000)
    res = picard_solve(CauchyProblem(1.0, lambda t, u: u, 1.0, grid, 1.0, 2.0), 1e-12, 1000)
    cont = float(np.max(np.abs(res.solution.values - np.exp(grid.points))))
    if cont > 5e-3:
        fails.append("continuous")
    first = f"instance {fails[0]}" if fails else ""
    return CheckRow("solver oracles (product solutions, e^t)", instances + 1, len(fails), worst, "1e-10 / 5e-3", first)


def absolute_tolerance(problem: CauchyProblem, target: float) -> float:
    """Weighted-norm tolerance that bounds successive iterates by ``target`` in the plain sup norm."""
    return target / float(problem.norm_context.e[-1])


def _quiet_solve(problem, tol, max_iter=5000, initial=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return picard_solve(problem, tol, max_iter, initial)


def contraction_instances(seed: int, instances: int):
    rng = _rng(seed, 10)
    for n in range(instances):
        ratio = CONTRACTION_RATIOS[n % len(CONTRACTION_RATIOS)]
        yield random_solver_problem(rng, ratio)


def check_contraction(seed: int, instances: int, tol: float = 1e-8) -> CheckRow:
    fails = []
    worst = -math.inf
    for n, (problem, desc) in enumerate(contraction_instances(seed, instances)):
        q = problem.contraction_bound
        res = _quiet_solve(problem, tol)
        ref = _quiet_solve(problem, tol / 100)
        err = weighted_metric(res.solution, ref.solution, problem.norm_context)
        apost = tol * q / (1 - q)
        excess = max(res.contraction_observed - (q + 0.1), err - apost)
        worst = max(worst, excess)
        if excess > 0:
            fails.append(f"instance {n}: {desc}")
    return CheckRow("contraction certificate and a-posteriori bound", instances, len(fails), worst, "observed <= L/eta + 0.1, err <= tol q/(1-q)", fails[0] if fails else "")


def check_uniqueness(seed: int, instances: int, tol: float = 1e-8) -> CheckRow:
    fails = []
    worst = 0.0
    for n, (problem, desc) in enumerate(contraction_instances(seed, instances)):
        a = _quiet_solve(problem, tol).solution
        b = _quiet_solve(problem, tol, initial=GridFunction.constant(problem.grid, 0.0)).solution
        d = weighted_metric(a, b, problem.norm_context)
        worst = max(worst, d / tol)
        if d > 10 * tol:
            fails.append(f"instance {n}: {desc}")
    return CheckRow("uniqueness probe from two initial iterates", instances, len(fails), worst, "metric <= 10 tol", fails[0] if fails else "")


def check_dependence(seed: int, instances: int, series_tol: float = 1e-12) -> CheckRow:
    rng = _rng(seed, 12)
    fails = []
    worst = math.inf
    for n in range(instances):
        pair, desc = random_dependence_pair(rng)
        rep = dependence_certify(pair, 1e-13, series_tol)
        worst = min(worst, rep.verdict.min_slack)
        if not rep.verdict.passed:
            fails.append(f"instance {n}: {desc}")
    return CheckRow("continuous dependence bound on random pairs", instances, len(fails), worst, "|u-v| <= bound + 1e-8 + series_tol", fails[0] if fails else "")


def closed_form_dependence(series_tol: float = 1e-12):
    """Pair ``alpha = 1``, ``f = 0.5 u``, ``w = 1`` versus ``w_bar = 1.1`` on lattice(0,6,1)."""
    grid = TimeScaleGrid.lattice(0, 6, 1)
    a = CauchyProblem(1.0, lambda t, u: 0.5 * u, 1.0, grid, 0.5, 2.0)
    b = CauchyProblem(1.0, lambda t, u: 0.5 * u, 1.1, grid, 0.5, 2.0)
    return dependence_certify(DependenceInput(a, b), 1e-13, series_tol)


def check_dependence_closed_form(series_tol: float = 1e-12) -> CheckRow:
    rep = closed_form_dependence(series_tol)
    grid = rep.bound.grid
    closed = np.allclose(rep.actual.values, 0.1 * 1.5**grid.points, rtol=1e-10, atol=1e-12)
    slack = rep.slack.values[rep.slack.mask]
    nonpos = int(np.sum(~(slack > 0)))
    fails = nonpos + int(not closed) + int(not rep.verdict.passed)
    first = f"slack <= 0 at {nonpos} of {slack.size} points" if nonpos else ""
    return CheckRow("closed-form dependence pair 0.1*1.5^t, positive slack", slack.size, fails, float(np.min(slack)), "slack > 0 everywhere", first)


def check_caputo() -> CheckRow:
    grid = TimeScaleGrid.lattice(0, 10, 1)
    worst = 0.0
    for a in (0.3, 0.5, 0.8):
        d = caputo_derivative(a, GridFunction.constant(grid, 3.7))
        worst = max(worst, float(np.max(np.abs(d.values[d.mask]))))
    f = GridFunction(grid, grid.points**2 - 3 * grid.points)
    d = caputo_derivative(1.0, f)
    fd = np.diff(f.values - f.values[0])
    exact = bool(np.array_equal(d.values[d.mask], fd))
    fails = int(worst > 1e-12) + int(not exact)
    return CheckRow("Caputo of constants vanishes; alpha=1 is a forward difference", 4, fails, worst, "<= 1e-12 / exact")


def run_suite(seed: int = 42, instances: int = GRONWALL_INSTANCES, solver_instances: int | None = None) -> list:
    if solver_instances is None:
        solver_instances = SOLVER_INSTANCES if instances == GRONWALL_INSTANCES else max(1, instances // 4)
    return [
        check_semigroup_integer(),
        check_semigroup_fractional(),
        check_semigroup_inequality(),
        check_semigroup_refinement(),
        check_power_recursion(seed),
        check_power_gamma(),
        check_gronwall_classical(),
        check_gronwall_dominance(seed, instances),
        check_solver_oracles(seed, solver_instances),
        check_contraction(seed, solver_instances),
        check_uniqueness(seed, solver_instances),
        check_dependence(seed, solver_instances),
        check_dependence_closed_form(),
        check_caputo(),
    ]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("check,instances,failures,worst,threshold,verdict,first_failure\n")
    for r in rows:
        first = r.first_failure.replace(",", ";")
        buf.write(f"{r.name.replace(',', ';')},{r.instances},{r.failures},{r.worst!r},{r.threshold},{'pass' if r.passed else 'FAIL'},{first}\n")
    return buf.getvalue()


def rows_to_table(rows) -> str:
    width = max(len(r.name) for r in rows)
    lines = []
    for r in rows:
        tag = "PASS" if r.passed else "FAIL"
        line = f"{tag}  {r.name:<{width}}  n={r.instances:<4d} worst={r.worst:.3e}  ({r.threshold})"
        if r.first_failure:
            line += f"  first failure: {r.first_failure}"
        lines.append(line)
    return "\n".join(lines) + "\n"
