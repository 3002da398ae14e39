"""Picard iteration for Caputo-type Cauchy problems and continuous dependence.

The problem ``^C D^alpha u = f(t, u)`` with datum ``w`` is solved in its
integral form

    u(t) = w h_{alpha-1}(t, t0) + (I^alpha f(., u))(t)

(``representation="rl-type"``, the default) or, as a cross-check, with
``w h_0(t, t0) = w`` as the inhomogeneous term (``"caputo-type"``).
Iterates are compared in the exponentially weighted sup norm in which the
Picard operator contracts by ``L/eta``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainError, GridMismatchError, NonConvergenceError, RHSEvaluationError
from .fracops import power_matrix, rl_integral
from .gronwall import BoundReport, GronwallInput, gronwall_bound
from .timescale import GridFunction, ScaleKind, TimeScaleGrid, WeightedNormContext, weighted_metric, weighted_norm

logger = logging.getLogger(__name__)

REPRESENTATIONS = ("rl-type", "caputo-type")


class DivergenceWarning(RuntimeWarning):
    """Successive Picard corrections stopped shrinking."""


@dataclass(frozen=True, eq=False)
class CauchyProblem:
    """Order ``0 < alpha <= 1``, right-hand side ``f(t, u)`` with Lipschitz constant ``L``.

    ``f`` is called with numpy arrays of times and states and must return
    an array of the same shape.
    """

    alpha: float
    f: Callable
    w: float
    grid: TimeScaleGrid
    L: float
    eta: float
    t0_index: int = 0
    representation: str = "rl-type"

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise DomainError("alpha must lie in (0, 1]")
        if not self.L >= 0:
            raise DomainError("Lipschitz constant must be nonnegative")
        if not self.eta > 0:
            raise DomainError("eta must be positive")
        if self.representation not in REPRESENTATIONS:
            raise DomainError(f"representation must be one of {REPRESENTATIONS}")
        object.__setattr__(self, "t0_index", self.grid.check_index(self.t0_index))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def contraction_bound(self) -> float:
        return self.L / self.eta

    @property
    def norm_context(self) -> WeightedNormContext:
        return WeightedNormContext(self.grid, self.eta, self.t0_index)

    def rhs(self, u: GridFunction) -> np.ndarray:
        """``f(t, u(t))`` on ``[t0, t_N)``, the points a delta integral samples."""
        t0 = self.t0_index
        t = self.grid.points[t0:-1]
        x = u.values[t0:-1]
        with np.errstate(all="ignore"):
            vals = np.asarray(self.f(t, x), dtype=float) * np.ones_like(t)
        if not np.all(np.isfinite(vals)):
            bad = t0 + int(np.flatnonzero(~np.isfinite(vals))[0])
            raise RHSEvaluationError(f"right-hand side is not finite at t = {self.grid.points[bad]!r}")
        out = np.zeros(len(self.grid))
        out[t0:-1] = vals
        return out


def kernel_term(problem: CauchyProblem) -> GridFunction:
    """``h_{alpha-1}(t, t0)`` (or ``1`` for the caputo-type form), masked where singular.

    On a continuous approximation with ``alpha < 1`` the kernel blows up at
    ``t0``; that sample carries the average of the kernel over the first
    cell instead and is excluded from norms and reports.
    """
    grid, t0, alpha = problem.grid, problem.t0_index, problem.alpha
    n = len(grid)
    vals = np.full(n, np.nan)
    mask = np.zeros(n, dtype=bool)
    mask[t0:] = True
    if problem.representation == "caputo-type" or alpha == 1:
        vals[t0:] = 1.0
        return GridFunction(grid, vals, mask)
    vals[t0:] = power_matrix(grid, alpha - 1.0)[t0:, t0]
    if grid.kind is ScaleKind.ContinuousApprox:
        first = power_matrix(grid, alpha)[t0 + 1, t0]
        vals[t0] = first / (grid.points[t0 + 1] - grid.points[t0])
        mask[t0] = False
    return GridFunction(grid, vals, mask)


def initial_term(problem: CauchyProblem) -> GridFunction:
    return problem.w * kernel_term(problem)


def apply_G(problem: CauchyProblem, u: GridFunction) -> GridFunction:
    """Picard operator ``(Gu)(t) = w h_{alpha-1}(t, t0) + I^alpha[f(., u)](t)``."""
    if not u.grid.same_as(problem.grid):
        raise GridMismatchError("iterate lives on a different grid")
    init = initial_term(problem)
    forcing = GridFunction(problem.grid, problem.rhs(u))
    integral = rl_integral(problem.alpha, forcing, problem.t0_index)
    vals = init.values + np.nan_to_num(integral.values)
    return GridFunction(problem.grid, vals, init.mask)


def compute_p1(problem: CauchyProblem) -> float:
    """Weighted norm of ``G`` applied to the zero function."""
    zero = GridFunction.constant(problem.grid, 0.0)
    return weighted_norm(apply_G(problem, zero), problem.norm_context)


@dataclass(frozen=True, eq=False)
class SolveResult:
    solution: GridFunction
    iterations: int
    final_metric: float
    contraction_observed: float
    p1: float
    contraction_bound: float
    converged: bool
    metric_history: tuple = ()
    warnings: tuple = field(default=())

    @property
    def error_bound(self) -> float:
        """A-posteriori distance to the fixed point, ``q/(1-q) * final_metric`` with ``q = L/eta``."""
        q = self.contraction_bound
        if q >= 1:
            return math.inf
        return self.final_metric * q / (1.0 - q)

    def summary(self) -> str:
        lines = [
            f"converged = {'true' if self.converged else 'false'}",
            f"iterations = {self.iterations}",
            f"final_metric = {self.final_metric!r}",
            f"p1 = {self.p1!r}",
            f"contraction_bound = {self.contraction_bound!r}",
            f"contraction_observed = {self.contraction_observed!r}",
            f"error_bound = {self.error_bound!r}",
        ]
        lines.extend(f"warning = {w}" for w in self.warnings)
        return "\n".join(lines) + "\n"


def picard_solve(
    problem: CauchyProblem,
    tol: float = 1e-10,
    max_iter: int = 1000,
    initial: GridFunction | None = None,
) -> SolveResult:
    """Iterate ``u_{n+1} = G(u_n)`` until successive iterates are ``tol``-close.

    The default starting iterate is ``w h_{alpha-1}(t, t0)``.  Raises
    :class:`NonConvergenceError` (with the partial result attached) when
    ``max_iter`` iterations do not reach ``tol``; emits a
    :class:`DivergenceWarning` when the ratio of successive corrections is
    at least one three times in a row.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    ctx = problem.norm_context
    u = initial_term(problem) if initial is None else initial
    history = []
    ratios = []
    streak = 0
    notes = []
    converged = False
    n = 0
    for n in range(1, int(max_iter) + 1):
        nxt = apply_G(problem, u)
        d = weighted_metric(nxt, u, ctx)
        history.append(d)
        floor = 64 * np.finfo(float).eps * max(1.0, weighted_norm(nxt, ctx))
        if len(history) >= 2 and history[-2] > floor:
            ratio = d / history[-2]
            ratios.append(ratio)
            streak = streak + 1 if ratio >= 1 else 0
            if streak == 3 and not notes:
                msg = f"successive-iterate ratio >= 1 for 3 iterations (last {ratio:.3g})"
                notes.append(msg)
                warnings.warn(msg, DivergenceWarning, stacklevel=2)
        u = nxt
        if d <= tol:
            converged = True
            break
    result = SolveResult(
        solution=u,
        iterations=n,
        final_metric=history[-1] if history else 0.0,
        contraction_observed=max(ratios) if ratios else 0.0,
        p1=compute_p1(problem),
        contraction_bound=problem.contraction_bound,
        converged=converged,
        metric_history=tuple(history),
        warnings=tuple(notes),
    )
    logger.debug("picard: %d iterations, metric %.3g", n, result.final_metric)
    if not converged:
        raise NonConvergenceError(
            f"Picard iteration did not reach tol={tol!r} in {max_iter} iterations", result
        )
    return result


def check_lipschitz(problem: CauchyProblem, samples: int = 256, seed: int = 0, spread: float = 10.0) -> float:
    """Largest observed ``|f(t,x) - f(t,y)| / |x - y|`` on random pairs; warns above ``L``."""
    rng = np.random.default_rng(seed)
    t = rng.choice(problem.grid.points, size=samples)
    x = rng.uniform(-spread, spread, size=samples)
    y = rng.uniform(-spread, spread, size=samples)
    keep = x != y
    with np.errstate(all="ignore"):
        ratio = np.abs(problem.f(t, x) - problem.f(t, y)) / np.abs(x - y)
    observed = float(np.max(ratio[keep])) if keep.any() else 0.0
    if observed > problem.L * (1 + 1e-9) + 1e-12:
        warnings.warn(
            f"observed Lipschitz ratio {observed:.6g} exceeds declared L = {problem.L!r}",
            RuntimeWarning,
            stacklevel=2,
        )
    return observed


# continuous dependence ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DependenceInput:
    """Problem ``(f, w)`` and its perturbation ``(f_bar, w_bar)`` on a shared grid."""

    problem_a: CauchyProblem
    problem_b: CauchyProblem
    L: float | None = None

    def __post_init__(self):
        a, b = self.problem_a, self.problem_b
        if not a.grid.same_as(b.grid):
            raise GridMismatchError("both problems must share a grid")
        if a.alpha != b.alpha or a.t0_index != b.t0_index or a.representation != b.representation:
            raise DomainError("both problems must share alpha, t0 and representation")
        L = a.L if self.L is None else float(self.L)
        if not L >= 0:
            raise DomainError("Lipschitz constant must be nonnegative")
        object.__setattr__(self, "L", L)


def dependence_H(inp: DependenceInput, v: GridFunction) -> GridFunction:
    """``|w - w_bar| h_{alpha-1}(t, t0) + |I^alpha[f(., v) - f_bar(., v)](t)|``."""
    a, b = inp.problem_a, inp.problem_b
    kern = kernel_term(a)
    diff = GridFunction(a.grid, a.rhs(v) - b.rhs(v))
    integral = rl_integral(a.alpha, diff, a.t0_index)
    vals = abs(a.w - b.w) * np.abs(kern.values) + np.abs(np.nan_to_num(integral.values))
    return GridFunction(a.grid, vals, kern.mask)


def dependence_certify(
    inp: DependenceInput,
    tol_solve: float = 1e-12,
    series_tol: float = 1e-12,
    max_iter: int = 2000,
    max_terms: int = 2000,
    tol: float | None = None,
) -> BoundReport:
    """Solve both problems and check ``|u - v|`` against the Gronwall bound built from ``H``.

    The verdict tolerance defaults to ``1e-8 + series_tol`` (scaled by
    ``max(1, |bound|)``).
    """
    a, b = inp.problem_a, inp.problem_b
    u = picard_solve(a, tol_solve, max_iter).solution
    v = picard_solve(b, tol_solve, max_iter).solution
    H = dependence_H(inp, v)
    L = inp.L
    gin = GronwallInput(H, GridFunction.constant(a.grid, L), a.alpha, L, a.t0_index)
    report = gronwall_bound(gin, series_tol, max_terms)
    report = replace(report, bound=GridFunction(a.grid, report.bound.values, report.bound.mask & H.mask))
    actual = GridFunction(a.grid, np.abs(u.values - v.values), u.mask & v.mask)
    return report.compare(actual, 1e-8 + series_tol if tol is None else tol)
