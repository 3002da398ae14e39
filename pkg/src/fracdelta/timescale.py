"""Finite time scales and the basic delta calculus on them.

A bounded time scale is stored as a strictly increasing array of points.
The forward jump of the last point is the point itself, so its graininess
is zero and it never contributes to a delta integral.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, GridMismatchError, TerminalPointError


class ScaleKind(enum.Enum):
    """How the points of a grid relate to the time scale they represent."""

    #: Uniform fine grid standing in for an interval of the real line.
    ContinuousApprox = "ContinuousApprox"
    #: The lattice ``a + h*Z`` truncated to ``[a, b]``; exact.
    UniformLattice = "UniformLattice"
    #: Any strictly increasing finite set; exact.
    Arbitrary = "Arbitrary"

    @property
    def is_discrete(self) -> bool:
        return self is not ScaleKind.ContinuousApprox


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeScaleGrid:
    """A finite, strictly increasing set of points with a kind tag.

    Grids compare and hash by identity; functions defined on a grid keep a
    reference to it and operations check that references agree.
    """

    points: np.ndarray
    kind: ScaleKind = ScaleKind.Arbitrary
    step: float | None = None

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise DomainError("a grid needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise DomainError("grid points must be finite")
        diffs = np.diff(pts)
        if np.any(diffs <= 0):
            raise DomainError("grid points must be strictly increasing")
        kind = ScaleKind(self.kind)
        step = self.step
        if kind is not ScaleKind.Arbitrary:
            if step is None:
                step = float(np.mean(diffs))
            if not np.allclose(diffs, step, rtol=1e-9, atol=0.0):
                raise DomainError(f"{kind.value} grid must have uniform spacing")
            step = float(step)
        else:
            step = None
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "step", step)

    # construction -------------------------------------------------------

    @classmethod
    def from_points(cls, points, kind=ScaleKind.Arbitrary) -> "TimeScaleGrid":
        return cls(np.asarray(points, dtype=float), ScaleKind(kind))

    @classmethod
    def uniform(cls, a: float, b: float, n: int) -> "TimeScaleGrid":
        """ContinuousApprox grid on ``[a, b]`` with ``n`` equal subintervals."""
        n = int(n)
        if n < 1 or not b > a:
            raise DomainError("uniform(a, b, n) needs b > a and n >= 1")
        return cls(np.linspace(a, b, n + 1), ScaleKind.ContinuousApprox, (b - a) / n)

    @classmethod
    def lattice(cls, a: float, b: float, h: float) -> "TimeScaleGrid":
        """The exact lattice ``{a, a+h, ..., b}``; ``(b - a)/h`` must be an integer."""
        if not h > 0 or not b > a:
            raise DomainError("lattice(a, b, h) needs h > 0 and b > a")
        ratio = (b - a) / h
        n = round(ratio)
        if abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)):
            raise DomainError("lattice(a, b, h): (b - a)/h must be an integer")
        return cls(a + h * np.arange(n + 1), ScaleKind.UniformLattice, float(h))

    # basic structure ----------------------------------------------------

    @property
    def N(self) -> int:
        """Index of the terminal point."""
        return self.points.size - 1

    def __len__(self) -> int:
        return self.points.size

    @property
    def mu(self) -> np.ndarray:
        """Graininess at every point; zero at the terminal point."""
        mu = np.zeros_like(self.points)
        mu[:-1] = np.diff(self.points)
        return mu

    def check_index(self, i: int) -> int:
        if isinstance(i, (bool, np.bool_)) or int(i) != i:
            raise DomainError(f"point index must be an integer, got {i!r}")
        i = int(i)
        if not 0 <= i <= self.N:
            raise DomainError(f"point index {i} outside 0..{self.N}")
        return i

    def same_as(self, other: "TimeScaleGrid") -> bool:
        if self is other:
            return True
        return (
            self.kind is other.kind
            and self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )

    # serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"kind={self.kind.value}"]
        lines.extend(repr(float(p)) for p in self.points)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TimeScaleGrid":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("kind="):
            raise DomainError("grid file must start with a 'kind=<name>' line")
        try:
            kind = ScaleKind(lines[0].split("=", 1)[1].strip())
        except ValueError as exc:
            raise DomainError(f"unknown grid kind in {lines[0]!r}") from exc
        try:
            points = [float(ln) for ln in lines[1:]]
        except ValueError as exc:
            raise DomainError(f"malformed grid point: {exc}") from exc
        return cls(np.asarray(points), kind)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "TimeScaleGrid":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values sampled at the points of a grid.

    ``mask`` marks the points that are reported and enter norms.  Values at
    masked-out points may still be used as quadrature samples (they must be
    finite for that) or may be NaN when they do not exist at all.
    """

    grid: TimeScaleGrid
    values: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != self.grid.points.shape:
            raise GridMismatchError(
                f"{vals.size} values for a grid of {self.grid.points.size} points"
            )
        if self.mask is None:
            mask = np.ones(vals.shape, dtype=bool)
        else:
            mask = np.array(self.mask, dtype=bool, copy=True)
            if mask.shape != vals.shape:
                raise GridMismatchError("mask shape does not match values")
        if not np.all(np.isfinite(vals[mask])):
            raise DomainError("grid function has non-finite values at defined points")
        vals.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_callable(cls, grid: TimeScaleGrid, fn) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.points), dtype=float) * np.ones(len(grid)))

    @classmethod
    def constant(cls, grid: TimeScaleGrid, c: float) -> "GridFunction":
        return cls(grid, np.full(len(grid), float(c)))

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values, mask=None) -> "GridFunction":
        return GridFunction(self.grid, values, self.mask if mask is None else mask)

    def _check_same(self, other: "GridFunction") -> None:
        if not self.grid.same_as(other.grid):
            raise GridMismatchError("grid functions live on different grids")

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check_same(other)
            return GridFunction(self.grid, self.values - other.values, self.mask & other.mask)
        return GridFunction(self.grid, self.values - other, self.mask)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check_same(other)
            return GridFunction(self.grid, self.values + other.values, self.mask & other.mask)
        return GridFunction(self.grid, self.values + other, self.mask)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same(other)
            return GridFunction(self.grid, self.values * other.values, self.mask & other.mask)
        return GridFunction(self.grid, self.values * other, self.mask)

    __rmul__ = __mul__

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values), self.mask)

    # serialization ------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,value\n")
        for t, v, ok in zip(self.grid.points, self.values, self.mask):
            buf.write(f"{float(t)!r},{float(v) if ok else math.nan!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, grid: TimeScaleGrid | None = None) -> "GridFunction":
        rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not rows or rows[0].replace(" ", "") != "t,value":
            raise DomainError("grid function CSV must have header 't,value'")
        ts, vs = [], []
        for ln in rows[1:]:
            parts = ln.split(",")
            if len(parts) != 2:
                raise DomainError(f"malformed CSV row {ln!r}")
            ts.append(float(parts[0]))
            vs.append(float(parts[1]))
        ts = np.asarray(ts)
        vs = np.asarray(vs)
        if grid is None:
            grid = TimeScaleGrid.from_points(ts)
        elif ts.shape != grid.points.shape or not np.allclose(ts, grid.points, rtol=1e-12, atol=1e-12):
            raise GridMismatchError("CSV abscissae do not match the grid")
        return cls(grid, np.where(np.isfinite(vs), vs, np.nan), np.isfinite(vs))


@dataclass(frozen=True, eq=False)
class WeightedNormContext:
    """Weight ``eta > 0`` and base point for the exponentially weighted sup norm."""

    grid: TimeScaleGrid
    eta: float
    t0_index: int = 0
    e: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError("eta must be positive")
        t0 = self.grid.check_index(self.t0_index)
        factors = 1.0 + self.grid.mu * float(self.eta)
        e = np.full(len(self.grid), np.nan)
        e[t0] = 1.0
        e[t0 + 1 :] = np.cumprod(factors[t0:-1])
        e.setflags(write=False)
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "t0_index", t0)
        object.__setattr__(self, "e", e)


# operations ---------------------------------------------------------------


def sigma(grid: TimeScaleGrid, i: int) -> int:
    """Index of the forward jump of point ``i``."""
    i = grid.check_index(i)
    return min(i + 1, grid.N)


def graininess(grid: TimeScaleGrid, i: int) -> float:
    i = grid.check_index(i)
    if i == grid.N:
        return 0.0
    return float(grid.points[i + 1] - grid.points[i])


def delta_derivative(f: GridFunction, i: int) -> float:
    """Forward difference quotient ``(f(sigma(t)) - f(t)) / mu(t)``."""
    grid = f.grid
    i = grid.check_index(i)
    if i == grid.N:
        raise TerminalPointError("delta derivative is undefined at the terminal point")
    return float((f.values[i + 1] - f.values[i]) / (grid.points[i + 1] - grid.points[i]))


def delta_derivative_values(values: np.ndarray, grid: TimeScaleGrid) -> np.ndarray:
    """Forward difference quotients at indices ``0..N-1``."""
    return np.diff(values) / np.diff(grid.points)


def delta_integral(f: GridFunction, a: int, b: int) -> float:
    """Left-endpoint delta integral ``sum_{a <= i < b} f(t_i) mu(t_i)``."""
    grid = f.grid
    a = grid.check_index(a)
    b = grid.check_index(b)
    if a > b:
        raise DomainError(f"delta_integral needs a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    vals = f.values[a:b]
    if not np.all(np.isfinite(vals)):
        raise DomainError("integrand is not finite on the integration range")
    return float(np.sum(vals * np.diff(grid.points[a : b + 1])))


def exp_eta(ctx: WeightedNormContext, grid: TimeScaleGrid, i: int) -> float:
    """Time-scale exponential ``e_eta(t_i, t_0)`` as a product of ``1 + mu*eta``."""
    if not ctx.grid.same_as(grid):
        raise GridMismatchError("context belongs to a different grid")
    i = grid.check_index(i)
    if i < ctx.t0_index:
        raise DomainError("e_eta(t, t0) needs t >= t0")
    return float(ctx.e[i])


def _norm_points(f: GridFunction, ctx: WeightedNormContext) -> np.ndarray:
    if not ctx.grid.same_as(f.grid):
        raise GridMismatchError("function and norm context live on different grids")
    sel = f.mask.copy()
    sel[: ctx.t0_index] = False
    return sel


def weighted_norm(f: GridFunction, ctx: WeightedNormContext) -> float:
    """``max |f(t)| / e_eta(t, t0)`` over the defined points at or after ``t0``."""
    sel = _norm_points(f, ctx)
    if not sel.any():
        return 0.0
    return float(np.max(np.abs(f.values[sel]) / ctx.e[sel]))


def weighted_metric(f: GridFunction, g: GridFunction, ctx: WeightedNormContext) -> float:
    if not f.grid.same_as(g.grid):
        raise GridMismatchError("functions live on different grids")
    return weighted_norm(f - g, ctx)
