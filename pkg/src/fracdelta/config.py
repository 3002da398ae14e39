"""Plain-text ``key = value`` configuration files and the builtin descriptors they use."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import FracDeltaError
from .timescale import GridFunction, TimeScaleGrid


class ConfigError(FracDeltaError, ValueError):
    """Malformed or incomplete configuration."""


_CALL = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*(?:\((.*)\))?\s*$")


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(text)
    cfg["__dir__"] = str(path.parent)
    return cfg


def _resolve(cfg: dict, p: str) -> Path:
    p = Path(p.strip())
    if not p.is_absolute() and "__dir__" in cfg:
        p = Path(cfg["__dir__"]) / p
    return p


def _call(desc: str):
    m = _CALL.match(desc)
    if not m:
        raise ConfigError(f"cannot parse descriptor {desc!r}")
    name, args = m.group(1), m.group(2)
    if args is None or not args.strip():
        return name, []
    try:
        return name, [float(a) for a in args.split(",")]
    except ValueError as exc:
        raise ConfigError(f"non-numeric argument in {desc!r}") from exc


def get(cfg: dict, key: str, cast=float, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return cast(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {cfg[key]!r}") from exc


def parse_grid(desc: str, cfg: dict | None = None) -> TimeScaleGrid:
    """``uniform(a,b,n)``, ``lattice(a,b,h)`` or ``file:<path>``."""
    cfg = cfg or {}
    desc = desc.strip()
    if desc.startswith("file:"):
        path = _resolve(cfg, desc[5:])
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read grid file {path}: {exc}") from exc
        try:
            return TimeScaleGrid.from_text(text)
        except ValueError as exc:
            raise ConfigError(f"corrupt grid file {path}: {exc}") from exc
    name, args = _call(desc)
    try:
        if name == "uniform" and len(args) == 3:
            if not float(args[2]).is_integer():
                raise ConfigError("uniform(a,b,n): n must be an integer")
            return TimeScaleGrid.uniform(args[0], args[1], int(args[2]))
        if name == "lattice" and len(args) == 3:
            return TimeScaleGrid.lattice(*args)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid grid {desc!r}: {exc}") from exc
    raise ConfigError(f"unknown grid descriptor {desc!r}")


@dataclass(frozen=True)
class RHS:
    """A right-hand side together with its natural Lipschitz constant (``None`` if not global)."""

    f: Callable
    lipschitz: float | None
    name: str


def parse_rhs(desc: str, cfg: dict | None = None, grid: TimeScaleGrid | None = None) -> RHS:
    """Builtins: ``zero``, ``linear(l)``, ``affine(l,c)``, ``logistic(r,K)``, ``custom-table:<path>``.

    ``custom-table`` reads a ``t,value`` CSV and uses it as a forcing term
    independent of ``u``, interpolated linearly between table points.
    """
    cfg = cfg or {}
    desc = desc.strip()
    if desc.startswith("custom-table:"):
        path = _resolve(cfg, desc[len("custom-table:"):])
        try:
            table = GridFunction.from_csv(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read table {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"corrupt table {path}: {exc}") from exc
        ts, vs = table.grid.points, table.values

        def tabulated(t, u):
            return np.interp(t, ts, vs) + 0.0 * u

        return RHS(tabulated, 0.0, desc)
    name, args = _call(desc)
    if name == "zero" and not args:
        return RHS(lambda t, u: 0.0 * u, 0.0, desc)
    if name == "linear" and len(args) == 1:
        lam = args[0]
        return RHS(lambda t, u: lam * u, abs(lam), desc)
    if name == "affine" and len(args) == 2:
        lam, c = args
        return RHS(lambda t, u: lam * u + c, abs(lam), desc)
    if name == "logistic" and len(args) == 2:
        r, K = args
        if K == 0:
            raise ConfigError("logistic(r,K) needs K != 0")
        return RHS(lambda t, u: r * u * (1.0 - u / K), None, desc)
    raise ConfigError(f"unknown right-hand side {desc!r}")


def parse_function(desc: str, grid: TimeScaleGrid, cfg: dict | None = None) -> GridFunction:
    """``const(c)``, ``affine(a,b)`` meaning ``a + b t``, or ``file:<path>`` (``t,value`` CSV)."""
    cfg = cfg or {}
    desc = desc.strip()
    if desc.startswith("file:"):
        path = _resolve(cfg, desc[5:])
        try:
            return GridFunction.from_csv(path.read_text(), grid)
        except OSError as exc:
            raise ConfigError(f"cannot read function file {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"corrupt function file {path}: {exc}") from exc
    name, args = _call(desc)
    if name == "const" and len(args) == 1:
        return GridFunction.constant(grid, args[0])
    if name == "affine" and len(args) == 2:
        return GridFunction(grid, args[0] + args[1] * grid.points)
    raise ConfigError(f"unknown function descriptor {desc!r}")


def parse_orders(cfg: dict) -> list:
    raw = cfg.get("orders", cfg.get("alpha"))
    if raw is None:
        raise ConfigError("missing required key 'orders' (or 'alpha')")
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad order list {raw!r}") from exc
