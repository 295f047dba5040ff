"""Scenario configuration: TOML files mapped onto metric, velocity and field objects.

A scenario file has one table per concern::

    [metric]                 family = "RoundSphere", radius = 1.0
    [velocity]               family = "LinearGradient", matrix = [[1,0,0],[0,1,0],[0,0,1]]
    [field]                  vector = [1.0, 0.0, 0.0], wavevector = [0, 0, 0]
    [frame]                  mode = "matched"            # or "explicit" with omega = [[...]]
    [region]                 lower, upper, counts, rule
    [time]                   start, stop, dt
    [flow]                   grid_counts, evolve_metric
    [energy]                 variant, h, numeric, tol, sigma, omega, theta, lambda, marginal
    [options]                include_vorticity, probe, einstein_tol, symmetry_tol
    [verify]                 suite, inject_fault

Custom metric components and sampled velocities are given as expressions of
``x1, x2, x3`` using numpy functions (``sin``, ``exp``, ...).
"""

from __future__ import annotations

import ast
import sys
from dataclasses import dataclass
from dataclasses import field as dc_field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry import (
    ConformalLyapunov,
    DiagonalCustom,
    EinsteinScaled,
    EuclideanFlat,
    HyperbolicSpace,
    MetricField,
    RoundSphere,
)
from .kinematics import (
    GridSampled,
    LinearGradient,
    PaperSteady,
    RigidRotation,
    Uniform,
    VelocityField,
    planar_shear,
)
from .numerics import QuadratureSpec


class ConfigError(Exception):
    """Invalid scenario configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str, line: int | None = None):
        super().__init__(field_name, message)
        self.field = field_name
        self.message = message
        self.line = line

    def __str__(self):
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.field}: {self.message}{where}"


_FUNCS = {name: getattr(np, name) for name in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "arctan", "abs")}
_CONSTS = {"pi": np.pi, "e": np.e}
_ALLOWED = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
            ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def compile_expression(text: str, field_name: str = "expression"):
    """Vectorised function of points ``(..., 3)`` from an arithmetic expression in x1, x2, x3."""
    try:
        tree = ast.parse(str(text), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(field_name, f"cannot parse {text!r}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ConfigError(field_name, f"unsupported syntax {type(node).__name__} in {text!r}")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ConfigError(field_name, f"unknown function in {text!r}")
        if isinstance(node, ast.Name) and node.id not in _FUNCS and node.id not in _CONSTS \
                and node.id not in ("x1", "x2", "x3"):
            raise ConfigError(field_name, f"unknown name {node.id!r}")
    code = compile(tree, field_name, "eval")

    def f(x):
        x = np.asarray(x, dtype=float)
        env = {"x1": x[..., 0], "x2": x[..., 1], "x3": x[..., 2], **_FUNCS, **_CONSTS}
        out = eval(code, {"__builtins__": {}}, env)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape[:-1])

    f.__name__ = str(text)
    return f


def _get(table: dict, key: str, section: str, default: Any = ..., kind=None):
    if key not in table:
        if default is ...:
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default
    value = table[key]
    if kind is not None:
        try:
            value = kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{section}.{key}", f"invalid value {value!r}") from exc
    return value


def _vector(value, name: str, n: int = 3) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"expected {n} numbers") from exc
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        raise ConfigError(name, f"expected {n} finite numbers")
    return arr


def _matrix(value, name: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, "expected a 3x3 array") from exc
    if arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
        raise ConfigError(name, "expected a finite 3x3 array")
    return arr


METRIC_FAMILIES = ("EuclideanFlat", "RoundSphere", "HyperbolicSpace", "ConformalLyapunov",
                   "EinsteinScaled", "DiagonalCustom")
VELOCITY_FAMILIES = ("Uniform", "LinearGradient", "RigidRotation", "PaperSteady",
                     "GridSampled", "PlanarShear", "Zero")


def build_metric(table: dict, section: str = "metric") -> MetricField:
    family = _get(table, "family", section, kind=str)
    if family == "EuclideanFlat":
        return EuclideanFlat()
    if family in ("RoundSphere", "HyperbolicSpace"):
        radius = _get(table, "radius", section, 1.0, float)
        if not radius > 0:
            raise ConfigError(f"{section}.radius", "must be positive")
        return (RoundSphere if family == "RoundSphere" else HyperbolicSpace)(radius)
    if family == "ConformalLyapunov":
        return ConformalLyapunov(_get(table, "rate", section, kind=float))
    if family == "EinsteinScaled":
        base_table = _get(table, "base", section)
        if not isinstance(base_table, dict):
            raise ConfigError(f"{section}.base", "expected a table")
        base = build_metric(base_table, f"{section}.base")
        lam = _get(table, "einstein_constant", section, None)
        scale = _get(table, "scale", section, 1.0, float)
        if not scale > 0:
            raise ConfigError(f"{section}.scale", "must be positive")
        try:
            return EinsteinScaled(base, None if lam is None else float(lam), scale)
        except ValueError as exc:
            raise ConfigError(f"{section}.einstein_constant", str(exc)) from exc
    if family == "DiagonalCustom":
        exprs = [str(_get(table, k, section, "1")) for k in ("g11", "g22", "g33")]
        fs = [compile_expression(e, f"{section}.g{i}{i}") for i, e in zip((1, 2, 3), exprs)]
        return DiagonalCustom(*fs, labels=exprs)
    raise ConfigError(f"{section}.family", f"unknown metric family {family!r}; "
                      f"expected one of {', '.join(METRIC_FAMILIES)}")


def build_velocity(table: dict, section: str = "velocity") -> VelocityField:
    family = _get(table, "family", section, kind=str)
    if family == "Zero":
        return Uniform([0.0, 0.0, 0.0])
    if family == "Uniform":
        return Uniform(_vector(_get(table, "value", section), f"{section}.value"))
    if family == "LinearGradient":
        return LinearGradient(_matrix(_get(table, "matrix", section), f"{section}.matrix"))
    if family == "PlanarShear":
        return planar_shear(_get(table, "rate", section, kind=float))
    if family == "RigidRotation":
        return RigidRotation(_vector(_get(table, "angular_velocity", section),
                                     f"{section}.angular_velocity"))
    if family == "PaperSteady":
        return PaperSteady()
    if family == "GridSampled":
        exprs = [str(_get(table, k, section, "0")) for k in ("v1", "v2", "v3")]
        fs = [compile_expression(e, f"{section}.v{i}") for i, e in zip((1, 2, 3), exprs)]

        def evaluator(x):
            return np.stack([f(x) for f in fs], axis=-1)

        return GridSampled(evaluator, label=", ".join(exprs))
    raise ConfigError(f"{section}.family", f"unknown velocity family {family!r}; "
                      f"expected one of {', '.join(VELOCITY_FAMILIES)}")


def build_region(table: dict, section: str = "region") -> QuadratureSpec:
    lower = _vector(_get(table, "lower", section, [0.0, 0.0, 0.0]), f"{section}.lower")
    upper = _vector(_get(table, "upper", section, [1.0, 1.0, 1.0]), f"{section}.upper")
    counts = _get(table, "counts", section, [8, 8, 8])
    if isinstance(counts, int):
        counts = [counts] * 3
    rule = _get(table, "rule", section, "midpoint", str)
    try:
        return QuadratureSpec(tuple(lower), tuple(upper), tuple(int(c) for c in counts), rule)
    except (ValueError, TypeError) as exc:
        raise ConfigError(section, str(exc)) from exc


@dataclass
class Scenario:
    """Everything a subcommand needs, parsed from one config file."""

    raw: dict
    metric: MetricField | None = None
    velocity: VelocityField | None = None
    field: np.ndarray | None = None
    wavevector: np.ndarray = dc_field(default_factory=lambda: np.zeros(3))
    frame: Any = "matched"
    region: QuadratureSpec | None = None
    t0: float = 0.0
    t1: float = 1.0
    dt: float = 1e-3
    evolve_metric: bool = False
    grid: QuadratureSpec | None = None
    include_vorticity: bool = False
    probe: np.ndarray | None = None
    einstein_tol: float = 1e-6
    symmetry_tol: float = 1e-8
    energy: dict = dc_field(default_factory=dict)
    verify: dict = dc_field(default_factory=dict)


def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        if line.strip().startswith(key):
            return i
    return None


def parse_scenario(text: str) -> Scenario:
    """Parse TOML text into a :class:`Scenario`; raises :class:`ConfigError`."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"TOML syntax error: {exc}") from exc
    if not raw:
        raise ConfigError("config", "empty configuration")
    sc = Scenario(raw=raw)
    try:
        if "metric" in raw:
            sc.metric = build_metric(raw["metric"])
        if "velocity" in raw:
            sc.velocity = build_velocity(raw["velocity"])
        if "field" in raw:
            f = raw["field"]
            sc.field = _vector(_get(f, "vector", "field"), "field.vector")
            sc.wavevector = _vector(_get(f, "wavevector", "field", [0.0, 0.0, 0.0]), "field.wavevector")
        if "frame" in raw:
            mode = _get(raw["frame"], "mode", "frame", "matched", str)
            if mode == "matched":
                sc.frame = "matched"
            elif mode == "explicit":
                om = _matrix(_get(raw["frame"], "omega", "frame", np.zeros((3, 3)).tolist()),
                             "frame.omega")
                if np.max(np.abs(om + om.T)) > 1e-12:
                    raise ConfigError("frame.omega", "explicit frame vorticity must be antisymmetric")
                sc.frame = om
            else:
                raise ConfigError("frame.mode", f"unknown frame mode {mode!r}")
        if "region" in raw:
            sc.region = build_region(raw["region"])
        if "time" in raw:
            tt = raw["time"]
            sc.t0 = _get(tt, "start", "time", 0.0, float)
            sc.t1 = _get(tt, "stop", "time", 1.0, float)
            sc.dt = _get(tt, "dt", "time", 1e-3, float)
            if not sc.dt > 0:
                raise ConfigError("time.dt", "must be positive")
            if not sc.t1 > sc.t0:
                raise ConfigError("time.stop", "must exceed time.start")
        if "flow" in raw:
            fl = raw["flow"]
            sc.evolve_metric = bool(_get(fl, "evolve_metric", "flow", False))
            if "grid_counts" in fl:
                counts = fl["grid_counts"]
                if isinstance(counts, int):
                    counts = [counts] * 3
                lower = _get(fl, "grid_lower", "flow", [0.0, 0.0, 0.0])
                upper = _get(fl, "grid_upper", "flow", [1.0, 1.0, 1.0])
                try:
                    sc.grid = QuadratureSpec(tuple(lower), tuple(upper),
                                             tuple(int(c) for c in counts), "trapezoid")
                except (ValueError, TypeError) as exc:
                    raise ConfigError("flow.grid_counts", str(exc)) from exc
        opts = raw.get("options", {})
        sc.include_vorticity = bool(_get(opts, "include_vorticity", "options", False))
        if "probe" in opts:
            sc.probe = _vector(opts["probe"], "options.probe")
        sc.einstein_tol = _get(opts, "einstein_tol", "options", 1e-6, float)
        sc.symmetry_tol = _get(opts, "symmetry_tol", "options", 1e-8, float)
        sc.energy = dict(raw.get("energy", {}))
        sc.verify = dict(raw.get("verify", {}))
    except ConfigError as exc:
        if exc.line is None:
            exc.line = _line_of(text, exc.field.split(".")[-1])
        raise
    return sc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    return parse_scenario(text)
