"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a ``PASS`` or ``FAIL`` line before asserting; run with
``pytest tests/test_acceptance.py -s`` to see them.
"""

import itertools
import math
import warnings

import numpy as np

from fracdelta.cli import main
from fracdelta.fracops import caputo_derivative, max_semigroup_residual, power_function, power_matrix, semigroup_residual
from fracdelta.gronwall import GronwallInput, fixed_point, gronwall_bound, verify_dominance
from fracdelta.solver import CauchyProblem, dependence_certify, picard_solve
from fracdelta.timescale import GridFunction, TimeScaleGrid, weighted_metric
from fracdelta.verify import (
    CONTRACTION_RATIOS,
    closed_form_dependence,
    contraction_instances,
    random_arbitrary_grid,
    random_dependence_pair,
    random_gronwall_instance,
    recursion_relative_error,
)

SEED = 42


def verdict(criterion: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    assert ok, detail


def quiet_solve(problem, tol, initial=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return picard_solve(problem, tol, 5000, initial)


def test_criterion_1_semigroup_identity():
    grid = TimeScaleGrid.lattice(0, 10, 1)
    residuals = {(a, k): max_semigroup_residual(grid, a, k) for a in (0.3, 0.5, 0.8, 1, 2) for k in (1, 2, 3)}
    bad = {key: r for key, r in residuals.items() if not r <= 1e-8}
    r500 = semigroup_residual(TimeScaleGrid.uniform(0, 1, 500), 0.5, 1, 500, 0)
    r1000 = semigroup_residual(TimeScaleGrid.uniform(0, 1, 1000), 0.5, 1, 1000, 0)
    ratio = r1000 / r500
    halves = 0.5 * 0.8 <= ratio <= 0.5 * 1.2
    worst = max(residuals.values())
    detail = (
        f"lattice max residual {worst:.3e} ({len(bad)} of {len(residuals)} cases above 1e-8, "
        f"first {min(bad) if bad else None}); refinement ratio {ratio:.4f} (need 0.5 +- 20%)"
    )
    verdict("1", not bad and halves, detail)


def test_criterion_2_power_function_oracles():
    rng = np.random.default_rng([SEED, 2])
    grid = random_arbitrary_grid(rng, 12)
    mu = grid.mu
    rel = 0.0
    for k in range(0, 5):
        P = power_matrix(grid, k)
        for i in range(12):
            for j in range(i + 1):
                # closed form: elementary symmetric polynomial of the graininesses on [t_j, t_i)
                exact = sum(math.prod(c) for c in itertools.combinations(mu[j:i], k))
                if P[i, j] != exact:
                    rel = max(rel, abs(P[i, j] - exact) / abs(exact))
    rel = max([rel] + [recursion_relative_error(grid, k) for k in range(0, 4)])
    value = power_function(TimeScaleGrid.uniform(0, 1, 1000), 0.5, 1000, 0)
    ok = rel <= 1e-10 and abs(value - 1.128379) <= 1e-5
    verdict("2", ok, f"closed form / recursion rel err {rel:.3e} (<= 1e-10); h_1/2(1,0) = {value:.9f}")


def test_criterion_3_gronwall_classical_reduction():
    grid = TimeScaleGrid.uniform(0, 1, 1000)
    rels = []
    for a, c in [(1.0, 1.0), (2.0, 0.5), (0.5, 2.0), (3.0, 1.5)]:
        inp = GronwallInput(GridFunction.constant(grid, a), GridFunction.constant(grid, c), 1.0, c)
        rels.append(abs(gronwall_bound(inp, 1e-12, 500).bound.values[-1] / (a * math.exp(c)) - 1))
    lat = TimeScaleGrid.lattice(0, 5, 1)
    inp = GronwallInput(GridFunction.constant(lat, 1.0), GridFunction.constant(lat, 1.0), 1.0, 1.0)
    bound = gronwall_bound(inp, 1e-12, 500).bound.values
    oracle = fixed_point(inp, 1e-14).values
    err = max(np.max(np.abs(bound - oracle)), np.max(np.abs(bound - 2.0 ** lat.points)))
    ok = max(rels) <= 0.01 and err <= 1e-8
    verdict("3", ok, f"max rel err vs a e^c {max(rels):.3e} (<= 1e-2); 2^t err {err:.3e} (<= 1e-8)")


def test_criterion_4_gronwall_dominance():
    rng = np.random.default_rng([SEED, 4])
    failures = []
    worst = math.inf
    for n in range(100):
        inp = random_gronwall_instance(rng, B=2.0)
        assert len(inp.grid) <= 32 and inp.alpha in (0.5, 1.0)
        y = fixed_point(inp, 1e-12)
        v = verify_dominance(inp, y, gronwall_bound(inp, 1e-14, 5000), 1e-8)
        worst = min(worst, v.min_slack)
        if not v.passed:
            failures.append(n)
    verdict("4", not failures, f"{100 - len(failures)}/100 instances dominated; min slack {worst:.3e}")


def test_criterion_5_solver_oracles():
    rng = np.random.default_rng([SEED, 5])
    worst = 0.0
    for _ in range(25):
        npts = int(rng.integers(3, 65))
        h = float(rng.choice([0.1, 0.25, 0.5, 1.0]))
        grid = TimeScaleGrid.lattice(0, (npts - 1) * h, h)
        lam = float(rng.uniform(-1, 1))
        w = float(rng.normal())
        problem = CauchyProblem(1.0, lambda t, u, lam=lam: lam * u, w, grid, abs(lam), 2 * abs(lam) + 0.5)
        # weighted tolerance chosen so that the plain sup-norm step is below 1e-13
        tol = 1e-13 / problem.norm_context.e[-1]
        sol = picard_solve(problem, tol, 1000).solution.values
        exact = w * np.concatenate([[1.0], np.cumprod(1 + lam * grid.mu[:-1])])
        worst = max(worst, float(np.max(np.abs(sol - exact) / np.maximum(1, np.abs(exact)))))
    grid = TimeScaleGrid.uniform(0, 1, 1000)
    sol = picard_solve(CauchyProblem(1.0, lambda t, u: u, 1.0, grid, 1.0, 2.0), 1e-12).solution.values
    cont = float(np.max(np.abs(sol - np.exp(grid.points))))
    verdict("5", worst <= 1e-10 and cont <= 5e-3, f"product solutions rel err {worst:.3e} (<= 1e-10); e^t sup err {cont:.3e} (<= 5e-3)")


def test_criterion_6_contraction_certificate():
    tol = 1e-8
    bad = []
    ratios_seen = set()
    worst_obs = -math.inf
    worst_err = -math.inf
    for n, (problem, desc) in enumerate(contraction_instances(SEED, 25)):
        q = problem.contraction_bound
        ratios_seen.add(round(q, 12))
        res = quiet_solve(problem, tol)
        ref = quiet_solve(problem, tol / 100)
        err = weighted_metric(res.solution, ref.solution, problem.norm_context)
        worst_obs = max(worst_obs, res.contraction_observed - q)
        worst_err = max(worst_err, err / (tol * q / (1 - q)))
        if res.contraction_observed > q + 0.1 or err > tol * q / (1 - q):
            bad.append(f"{n}: {desc}")
    assert ratios_seen == set(CONTRACTION_RATIOS)
    detail = f"max(observed - L/eta) = {worst_obs:.3f} (<= 0.1); max err/a-posteriori bound = {worst_err:.3f} (<= 1)"
    verdict("6", not bad, detail + (f"; first failure {bad[0]}" if bad else ""))


def test_criterion_7_uniqueness_probe():
    tol = 1e-8
    worst = 0.0
    for problem, _ in contraction_instances(SEED, 25):
        assert problem.contraction_bound < 1
        a = quiet_solve(problem, tol).solution
        start = GridFunction(problem.grid, np.cos(3 * problem.grid.points) * 10.0)
        b = quiet_solve(problem, tol, initial=start).solution
        worst = max(worst, weighted_metric(a, b, problem.norm_context) / tol)
    verdict("7", worst <= 10, f"max metric between limits = {worst:.3f} tol (<= 10 tol)")


def test_criterion_8_continuous_dependence():
    series_tol = 1e-12
    rng = np.random.default_rng([SEED, 8])
    failures = []
    for n in range(25):
        pair, desc = random_dependence_pair(rng)
        assert pair.problem_a.contraction_bound < 1
        rep = dependence_certify(pair, 1e-13, series_tol, tol=1e-8 + series_tol)
        if not rep.verdict.passed:
            failures.append(f"{n}: {desc}")
    rep = closed_form_dependence(series_tol)
    grid = rep.bound.grid
    closed = np.allclose(rep.actual.values, 0.1 * 1.5**grid.points, rtol=1e-10)
    slack = rep.slack.values
    positive = bool(np.all(slack > 0))
    detail = (
        f"{25 - len(failures)}/25 random pairs dominated; closed form matches 0.1*1.5^t: {closed}; "
        f"closed-form slack min {slack.min():.3e}, positive at {int(np.sum(slack > 0))}/{slack.size} points"
    )
    verdict("8", not failures and closed and rep.verdict.passed and positive, detail)


def test_criterion_9_caputo_sanity():
    grid = TimeScaleGrid.lattice(0, 10, 1)
    worst = 0.0
    for a in (0.3, 0.5, 0.8):
        d = caputo_derivative(a, GridFunction.constant(grid, 4.2))
        worst = max(worst, float(np.max(np.abs(d.values[d.mask]))))
    rng = np.random.default_rng([SEED, 9])
    f = GridFunction(grid, rng.normal(size=11))
    d = caputo_derivative(1.0, f)
    exact = bool(np.array_equal(d.values[d.mask], np.diff(f.values - f.values[0])))
    verdict("9", worst <= 1e-12 and exact, f"max |Caputo of constant| {worst:.1e} (<= 1e-12); alpha=1 forward difference exact: {exact}")


def test_criterion_10_cli_determinism(tmp_path, capsys):
    a = main(["verify", "--seed", "42", "--out", str(tmp_path / "a")])
    b = main(["verify", "--seed", "42", "--out", str(tmp_path / "b")])
    capsys.readouterr()
    same = all(
        (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for name in ("verify.csv", "summary.txt")
    )
    failing = [ln.split(",")[0] for ln in (tmp_path / "a" / "verify.csv").read_text().splitlines()[1:] if ",FAIL," in ln]
    with capsys.disabled():
        verdict("10", same and a == 0 and b == 0, f"byte-identical: {same}; exit codes {a}, {b} (need 0); failing checks: {failing}")
