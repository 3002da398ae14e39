"""Generalized delta power functions and fractional delta operators.

The power function ``h_a(t, s)`` is available in closed form on continuous
approximations, ``(t - s)**a / Gamma(a + 1)``, and on uniform lattices
``hZ``, where with ``n = (t - s)/h``

    h_a(t, s) = h**a * Gamma(n + 1) / (Gamma(n + 1 - a) * Gamma(a + 1)),

taken as zero whenever ``n + 1 - a <= 0`` (outside the support of the
discrete power, matching ``binom(n, k) = 0`` for ``n < k``).  On arbitrary
discrete scales only integer orders exist, via the recursion
``h_{k+1}(t, s) = int_s^t h_k(tau, s) dtau``.

Fractional integrals are Volterra sums ``sum_j W[i, j] f(t_j)``.  The
weight of the cell ``[t_j, sigma(t_j))`` is

    W[i, j] = h_a(t_i, t_j) - h_a(t_i, sigma(t_j)),

which equals ``h_{a-1}(t_i, sigma(t_j)) * mu(t_j)`` exactly on discrete
scales and is the exact cell integral of the kernel on continuous
approximations, where ``h_{a-1}(t_i, sigma(t_{i-1}))`` itself is infinite
for ``a < 1``.
"""

from __future__ import annotations

import io
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InsufficientGridError, UnsupportedScaleError
from .timescale import GridFunction, ScaleKind, TimeScaleGrid


def _is_integer(x: float) -> bool:
    return float(x).is_integer()


@dataclass(frozen=True)
class FractionalOrder:
    """An order ``alpha`` together with its integer ceiling ``m``.

    ``m = floor(alpha) + 1`` for non-integer orders and ``m = alpha`` for
    integer ones.
    """

    alpha: float

    @property
    def m(self) -> int:
        a = float(self.alpha)
        if _is_integer(a):
            return int(a)
        return math.floor(a) + 1

    @property
    def is_integer(self) -> bool:
        return _is_integer(self.alpha)


# power matrices ------------------------------------------------------------

_CACHE_SIZE = 24
_cache: OrderedDict = OrderedDict()
_cache_lock = threading.Lock()


def _cached(key, build):
    with _cache_lock:
        if key in _cache:
            _cache.move_to_end(key)
            return _cache[key]
    value = build()
    value.setflags(write=False)
    with _cache_lock:
        _cache[key] = value
        while len(_cache) > _CACHE_SIZE:
            _cache.popitem(last=False)
    return value


def _check_order(grid: TimeScaleGrid, alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= -1:
        raise DomainError(f"power function order must exceed -1, got {alpha}")
    if grid.kind is ScaleKind.Arbitrary and not _is_integer(alpha):
        raise UnsupportedScaleError("fractional order unsupported on Arbitrary scale")
    return alpha


def _lattice_power(n: np.ndarray, alpha: float, h: float) -> np.ndarray:
    """``h_alpha`` on ``hZ`` for integer offsets ``n >= 0``."""
    n = np.asarray(n, dtype=float)
    if _is_integer(alpha):
        k = int(alpha)
        out = np.ones_like(n)
        for r in range(k):
            out = out * (n - r) / (r + 1)
        out = np.where(n >= k, out, 0.0)
        return out * h**k
    arg = n + 1.0 - alpha
    ok = arg > 0
    logv = np.where(
        ok,
        gammaln(n + 1.0) - gammaln(np.where(ok, arg, 1.0)) - gammaln(alpha + 1.0),
        -np.inf,
    )
    return np.exp(logv + alpha * math.log(h))


def _continuous_power(x: np.ndarray, alpha: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if alpha == 0:
        return np.ones_like(x)
    with np.errstate(divide="ignore"):
        return np.power(x, alpha) / math.gamma(alpha + 1.0)


def _recursive_powers(grid: TimeScaleGrid, k: int) -> np.ndarray:
    n = len(grid)
    lower = np.tril(np.ones((n, n)))
    mat = lower
    mu = grid.mu
    for _ in range(k):
        # h_{k+1}(t_i, t_j) = sum_{j <= l < i} h_k(t_l, t_j) mu(t_l)
        incr = mat * mu[:, None]
        nxt = np.zeros_like(mat)
        nxt[1:] = np.cumsum(incr[:-1], axis=0)
        mat = nxt * lower
    return mat


def power_matrix(grid: TimeScaleGrid, alpha: float) -> np.ndarray:
    """Matrix ``P[i, j] = h_alpha(t_i, t_j)`` for ``i >= j``; zero above the diagonal.

    On continuous approximations with ``alpha < 0`` the diagonal is ``inf``.
    The returned array is read-only and may be shared.
    """
    alpha = _check_order(grid, alpha)

    def build():
        n = len(grid)
        i, j = np.tril_indices(n)
        out = np.zeros((n, n))
        if grid.kind is ScaleKind.UniformLattice:
            out[i, j] = _lattice_power(i - j, alpha, grid.step)
        elif grid.kind is ScaleKind.ContinuousApprox:
            out[i, j] = _continuous_power(grid.points[i] - grid.points[j], alpha)
        else:
            out = _recursive_powers(grid, int(alpha))
        return out

    return _cached(("P", grid, alpha), build)


def power_function(grid: TimeScaleGrid, alpha: float, i: int, j: int) -> float:
    """``h_alpha(t_i, t_j)`` for ``t_i >= t_j``."""
    i = grid.check_index(i)
    j = grid.check_index(j)
    if i < j:
        raise DomainError("h_alpha(t, s) needs t >= s")
    alpha = _check_order(grid, alpha)
    if grid.kind is ScaleKind.UniformLattice:
        return float(_lattice_power(np.array(i - j), alpha, grid.step))
    if grid.kind is ScaleKind.ContinuousApprox:
        return float(_continuous_power(np.array(grid.points[i] - grid.points[j]), alpha))
    return float(power_matrix(grid, alpha)[i, j])


@dataclass(frozen=True, eq=False)
class PowerFunctionTable:
    """Shifted power function values ``h_alpha(t_i, sigma(t_j))``.

    ``entries[i, j]`` is filled for ``j < i`` (zero elsewhere) and
    ``diagonal[i] = h_alpha(t_i, t_i)``.
    """

    grid: TimeScaleGrid
    alpha: float
    entries: np.ndarray
    diagonal: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("i,j,t_i,sigma_t_j,h_alpha\n")
        pts = self.grid.points
        n = len(self.grid)
        for i in range(n):
            for j in range(i):
                buf.write(f"{i},{j},{float(pts[i])!r},{float(pts[j + 1])!r},{float(self.entries[i, j])!r}\n")
        return buf.getvalue()


def power_table(grid: TimeScaleGrid, alpha: float) -> PowerFunctionTable:
    P = power_matrix(grid, alpha)
    n = len(grid)
    entries = np.zeros((n, n))
    entries[1:, :-1] = np.tril(P[1:, 1:])
    entries.setflags(write=False)
    diagonal = np.diag(P).copy()
    diagonal.setflags(write=False)
    return PowerFunctionTable(grid, float(alpha), entries, diagonal)


def check_nonnegative(grid: TimeScaleGrid, alpha: float) -> None:
    """Fail fast when a power function of this order takes negative values."""
    P = power_matrix(grid, alpha)
    low = P[np.tril_indices(len(grid))]
    if np.any(low < 0):
        raise DomainError(f"h_{alpha} takes negative values on this grid")


def convolution_weights(grid: TimeScaleGrid, alpha: float) -> np.ndarray:
    """Weights ``W`` with ``(I^alpha f)(t_i) = sum_{j < i} W[i, j] f(t_j)`` for ``alpha > 0``."""
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError("convolution weights need alpha > 0")

    def build():
        n = len(grid)
        W = np.zeros((n, n))
        if grid.kind is ScaleKind.ContinuousApprox:
            P = power_matrix(grid, alpha)
            W[:, :-1] = P[:, :-1] - P[:, 1:]
            W = np.tril(W, -1)
        else:
            K = power_matrix(grid, alpha - 1.0)
            W[:, :-1] = K[:, 1:] * grid.mu[:-1][None, :]
            W = np.tril(W, -1)
        return W

    return _cached(("W", grid, alpha), build)


def _forward_kernel_density(grid: TimeScaleGrid, order: float) -> np.ndarray:
    """``D[l, j] = h_order(t_l, t_j)`` for ``l >= j`` in the delta-integral sense.

    On discrete scales these are the point values.  On continuous
    approximations they are cell averages of ``h_order(., t_j)`` over
    ``[t_l, t_{l+1})``, which stay finite at ``l = j`` for negative orders.
    """
    if grid.kind.is_discrete:
        return power_matrix(grid, order)
    P = power_matrix(grid, order + 1.0)
    D = np.zeros_like(P)
    D[:-1] = (P[1:] - P[:-1]) / grid.mu[:-1, None]
    return np.tril(D)


def semigroup_residual_matrix(grid: TimeScaleGrid, alpha: float, k: int):
    """Left and right sides of the composition identity for all index pairs.

    Returns ``(lhs, rhs)`` with, for ``j < i``,
    ``lhs[i, j] = int_{sigma(t_j)}^{t_i} h_{alpha-1}(t_i, sigma(tau)) h_{k alpha-1}(tau, sigma(t_j)) dtau``
    and ``rhs[i, j] = h_{(k+1) alpha - 1}(t_i, sigma(t_j))``.
    """
    k = int(k)
    if k < 1:
        raise DomainError("k must be a positive integer")
    W = convolution_weights(grid, alpha)
    D = _forward_kernel_density(grid, k * alpha - 1.0)
    n = len(grid)
    # second factor as a function of tau for each base j, shifted to sigma(t_j)
    F = np.zeros((n, n))
    F[:, :-1] = D[:, 1:]
    lhs = W @ F
    R = power_matrix(grid, (k + 1) * alpha - 1.0)
    rhs = np.zeros((n, n))
    rhs[:, :-1] = R[:, 1:]
    lower = np.tril(np.ones((n, n), dtype=bool), -1)
    return np.where(lower, lhs, 0.0), np.where(lower, rhs, 0.0)


def semigroup_residual(grid: TimeScaleGrid, alpha: float, k: int, i: int, j: int) -> float:
    """``|LHS - RHS|`` of the kernel composition identity at ``(t_i, t_j)``, ``t_j < t_i``.

    The left side is assembled pointwise and summed with the plain delta
    integral; it is an independent route from ``semigroup_residual_matrix``.
    """
    from .timescale import delta_integral

    i = grid.check_index(i)
    j = grid.check_index(j)
    if not j < i:
        raise DomainError("semigroup residual needs t_j < t_i")
    W = convolution_weights(grid, alpha)
    D = _forward_kernel_density(grid, int(k) * alpha - 1.0)
    mu = grid.mu
    s1 = j + 1
    vals = np.zeros(len(grid))
    for tau in range(s1, i):
        vals[tau] = (W[i, tau] / mu[tau]) * D[tau, s1]
    lhs = delta_integral(GridFunction(grid, vals), s1, i)
    rhs = power_function(grid, (k + 1) * alpha - 1.0, i, s1)
    return abs(lhs - rhs)


def max_semigroup_residual(grid: TimeScaleGrid, alpha: float, k: int) -> float:
    lhs, rhs = semigroup_residual_matrix(grid, alpha, k)
    lower = np.tril(np.ones(lhs.shape, dtype=bool), -1)
    return float(np.max(np.abs(lhs - rhs)[lower]))


# fractional operators --------------------------------------------------------


def _t0(f: GridFunction, t0_index: int) -> int:
    return f.grid.check_index(t0_index)


def rl_integral(alpha: float, f: GridFunction, t0_index: int = 0) -> GridFunction:
    """Riemann-Liouville fractional delta integral with base point ``t0``.

    ``alpha = 0`` returns ``f``.  For ``alpha > 0`` the value at ``t_i`` is
    ``sum_{t0 <= j < i} W[i, j] f(t_j)``; points before ``t0`` are undefined.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise DomainError("rl_integral needs alpha >= 0; use rl_derivative for negative orders")
    grid = f.grid
    t0 = _t0(f, t0_index)
    if alpha == 0:
        return f
    W = convolution_weights(grid, alpha)
    samples = f.values[t0:-1]
    if not np.all(np.isfinite(samples)):
        raise DomainError("integrand is not finite on [t0, t_N)")
    out = np.full(len(grid), np.nan)
    out[t0:] = W[t0:, t0:-1] @ samples
    mask = np.zeros(len(grid), dtype=bool)
    mask[t0:] = True
    return GridFunction(grid, out, mask)


def _difference_m_times(g: GridFunction, m: int, start: int) -> GridFunction:
    grid = g.grid
    vals = np.array(g.values)
    end = grid.N  # last index with a value
    for _ in range(m):
        d = np.full(len(grid), np.nan)
        d[start:end] = (vals[start + 1 : end + 1] - vals[start:end]) / np.diff(
            grid.points[start : end + 1]
        )
        vals = d
        end -= 1
    mask = np.zeros(len(grid), dtype=bool)
    mask[start : end + 1] = True
    return GridFunction(grid, vals, mask)


def rl_derivative(alpha: float, f: GridFunction, s_index: int = 0) -> GridFunction:
    """Riemann-Liouville fractional delta derivative ``D^m I^{m - alpha} f``.

    The trailing ``m`` points, where ``m`` nested forward differences do
    not exist, are left undefined.  Negative orders are integrals.
    """
    alpha = float(alpha)
    if alpha < 0:
        return rl_integral(-alpha, f, s_index)
    s = _t0(f, s_index)
    order = FractionalOrder(alpha)
    m = order.m
    if m == 0:
        return f
    if f.grid.N - m < s:
        raise InsufficientGridError(f"need more than {m} points after the base point")
    g = rl_integral(m - alpha, f, s)
    return _difference_m_times(g, m, s)


def taylor_polynomial(f: GridFunction, m: int, t0_index: int = 0) -> GridFunction:
    """``sum_{k < m} h_k(t, t0) f^{Delta^k}(t0)`` on ``[t0, t_N]``."""
    grid = f.grid
    t0 = _t0(f, t0_index)
    if grid.N - t0 < m - 1:
        raise InsufficientGridError(f"need {m} points from t0 for the Taylor data")
    out = np.zeros(len(grid))
    deriv = np.array(f.values, dtype=float)
    for k in range(m):
        coeff = deriv[t0]
        if not math.isfinite(coeff):
            raise DomainError("f is not defined near t0")
        out += coeff * power_matrix(grid, k)[:, t0]
        if k + 1 < m:
            nxt = np.full(len(grid), np.nan)
            nxt[:-1] = np.diff(deriv) / np.diff(grid.points)
            deriv = nxt
    mask = np.zeros(len(grid), dtype=bool)
    mask[t0:] = True
    out[:t0] = np.nan
    return GridFunction(grid, out, mask)


def caputo_derivative(alpha: float, f: GridFunction, t0_index: int = 0) -> GridFunction:
    """Caputo fractional delta derivative: RL derivative of ``f`` minus its Taylor part."""
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError("Caputo derivative needs alpha > 0")
    t0 = _t0(f, t0_index)
    m = FractionalOrder(alpha).m
    taylor = taylor_polynomial(f, m, t0)
    vals = np.full(len(f.grid), np.nan)
    vals[t0:] = f.values[t0:] - taylor.values[t0:]
    mask = np.zeros(len(f.grid), dtype=bool)
    mask[t0:] = True
    return rl_derivative(alpha, GridFunction(f.grid, vals, mask), t0)
