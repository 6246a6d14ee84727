"""Run configuration: flat ``key = value`` files with ``#`` comments.

Lists are comma separated. In SI mode ``mass`` and ``kappa`` carry explicit
unit suffixes (``kg`` and ``1/m``); grid coordinates and ``r_min`` are always
natural units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import units
from .koga_field import DEFAULT_R_MIN, FieldParams, SpacetimePoint


class ConfigError(ValueError):
    """Bad configuration; ``str()`` gives a ``source:line: message`` diagnostic."""

    def __init__(self, message: str, line: int | None = None, source: str = "config", key: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        self.key = key
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)

    def located(self, line: int | None, source: str) -> ConfigError:
        return ConfigError(self.message, line, source, self.key)


_SUFFIXES = {"mass": "kg", "kappa": "1/m"}


@dataclass(frozen=True)
class RunConfig:
    units: str = "natural"
    mass: float | None = None
    kappa: float = 0.0
    r_min: float = DEFAULT_R_MIN
    # grid
    t: tuple[float, ...] = (0.0,)
    x: tuple[float, ...] | None = None
    y: tuple[float, ...] | None = None
    z: tuple[float, ...] | None = None
    extent: float = 2.0
    resolution: int = 4
    # random sampling for verify / crosscheck
    seed: int = 0
    points: int = 1000
    fd_points: int = 20
    r_range: tuple[float, float] = (0.1, 10.0)
    t_range: tuple[float, float] = (0.0, 10.0)
    verify_kappas: tuple[float, ...] = (0.0, 0.3)
    rotation_angles: tuple[float, ...] = (1.0, 2 * math.pi)
    # tolerances
    tol_analytic: float = 1e-10
    tol_decompose: float = 1e-12
    fd_steps: tuple[float, ...] = (1e-2, 5e-3, 2.5e-3)
    order_target: float = 2.0
    order_tol: float = 0.2
    # output
    format: str = "csv"
    out: str | None = None
    jobs: int = 1
    explicit: frozenset = field(default_factory=frozenset, compare=False)

    def params(self, kappa: float | None = None) -> FieldParams:
        """Field parameters in natural units (SI input is converted)."""
        k = self.kappa if kappa is None else kappa
        if self.units == "si":
            mass = units.M_E_SI if self.mass is None else self.mass
            return FieldParams(m=mass, kappa=k, unit_mode="si", r_min=self.r_min).to_natural()
        return FieldParams(m=1.0 if self.mass is None else self.mass, kappa=k, r_min=self.r_min)

    def kappa_list(self) -> tuple[float, ...]:
        if "kappa" in self.explicit:
            return (self.kappa,)
        # verify_kappas are natural units whatever the unit mode
        if self.units == "si":
            return tuple(k / units.LENGTH_UNIT_SI for k in self.verify_kappas)
        return self.verify_kappas

    def axis(self, name: str) -> tuple[float, ...]:
        values = getattr(self, name)
        if values is not None:
            return values
        if self.resolution == 1:
            return (0.0,)
        return tuple(float(v) for v in np.linspace(-self.extent, self.extent, self.resolution))

    def grid(self) -> list[SpacetimePoint]:
        """Grid points, t-major then x, y, z; rejects points with r < r_min."""
        xs, ys, zs = self.axis("x"), self.axis("y"), self.axis("z")
        pts = []
        for t in self.t:
            for x in xs:
                for y in ys:
                    for z in zs:
                        p = SpacetimePoint(t, x, y, z)
                        if p.r < self.r_min:
                            raise ConfigError(
                                f"grid point ({x:g}, {y:g}, {z:g}) lies inside r < r_min = {self.r_min:g}"
                            )
                        pts.append(p)
        return pts

    def as_dict(self) -> dict:
        d = {}
        for name in self.__dataclass_fields__:
            if name == "explicit":
                continue
            v = getattr(self, name)
            d[name] = list(v) if isinstance(v, tuple) else v
        return d


def _float(text: str, key: str, line: int, unit_mode: str | None = None) -> float:
    parts = text.split()
    if not parts:
        raise ConfigError(f"{key}: missing value", line)
    if len(parts) > 2:
        raise ConfigError(f"{key}: cannot parse {text!r}", line)
    if len(parts) == 2:
        expected = _SUFFIXES.get(key)
        if expected is None:
            raise ConfigError(f"{key}: takes no unit suffix", line)
        if parts[1] != expected:
            raise ConfigError(f"{key}: unit must be {expected!r}, got {parts[1]!r}", line)
        if unit_mode != "si":
            raise ConfigError(f"{key}: unit suffix given but units = natural", line)
    elif unit_mode == "si" and key in _SUFFIXES:
        raise ConfigError(f"{key}: SI quantities need an explicit unit ({_SUFFIXES[key]})", line)
    try:
        value = float(parts[0])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {parts[0]!r}", line) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite", line)
    return value


def _float_list(text: str, key: str, line: int) -> tuple[float, ...]:
    if not text.strip():
        return ()
    return tuple(_float(item, key, line) for item in text.split(","))


def _int(text: str, key: str, line: int) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {text.strip()!r}", line) from None


_LISTS = {"t", "x", "y", "z", "verify_kappas", "rotation_angles", "fd_steps"}
_PAIRS = {"r_range", "t_range"}
_INTS = {"resolution", "seed", "points", "fd_points", "jobs"}
_FLOATS = {"mass", "kappa", "r_min", "extent", "tol_analytic", "tol_decompose", "order_target", "order_tol"}


def parse_config(text: str, source: str = "config") -> RunConfig:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in RunConfig.__dataclass_fields__ or key == "explicit":
            raise ConfigError(f"unknown key {key!r}", lineno, source)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno, source)
        entries[key] = (value, lineno)

    try:
        unit_mode = entries.get("units", ("natural", None))[0].lower()
        units.unit_system(unit_mode)
    except ValueError as exc:
        raise ConfigError(str(exc), entries["units"][1], source) from None

    values: dict = {}
    for key, (value, lineno) in entries.items():
        try:
            if key in _LISTS:
                values[key] = _float_list(value, key, lineno)
            elif key in _PAIRS:
                pair = _float_list(value, key, lineno)
                if len(pair) != 2 or not pair[0] < pair[1]:
                    raise ConfigError(f"{key}: needs two increasing values", lineno)
                values[key] = pair
            elif key in _INTS:
                values[key] = _int(value, key, lineno)
            elif key in _FLOATS:
                values[key] = _float(value, key, lineno, unit_mode)
            else:
                values[key] = value.lower() if key in ("units", "format") else value
        except ConfigError as exc:
            raise exc.located(lineno, source) from None
    values["explicit"] = frozenset(entries)
    try:
        return validate(RunConfig(**values))
    except ConfigError as exc:
        line = entries[exc.key][1] if exc.key in entries else None
        raise exc.located(line, source) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config(text, source=str(path))


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.units not in ("natural", "si"):
        raise ConfigError(f"units: unknown unit mode {cfg.units!r}", key="units")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format: must be csv or json, got {cfg.format!r}", key="format")
    if cfg.resolution < 1:
        raise ConfigError("resolution: must be at least 1", key="resolution")
    if cfg.points < 1 or cfg.fd_points < 1:
        raise ConfigError("points: must be at least 1", key="points")
    if cfg.jobs < 1:
        raise ConfigError("jobs: must be at least 1", key="jobs")
    if not cfg.r_min > 0:
        raise ConfigError("r_min: must be positive", key="r_min")
    if cfg.r_range[0] < cfg.r_min:
        raise ConfigError("r_range: sampling domain must exclude r < r_min", key="r_range")
    if len(cfg.fd_steps) < 3 or any(b >= a for a, b in zip(cfg.fd_steps, cfg.fd_steps[1:])):
        raise ConfigError("fd_steps: need at least three strictly decreasing steps", key="fd_steps")
    if min(cfg.fd_steps) <= 0:
        raise ConfigError("fd_steps: steps must be positive", key="fd_steps")
    if cfg.r_range[0] - max(cfg.fd_steps) < cfg.r_min:
        raise ConfigError("fd_steps: largest stencil reaches r < r_min", key="fd_steps")
    for name in ("tol_analytic", "tol_decompose", "order_tol"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name}: must be positive", key=name)
    try:
        for k in cfg.kappa_list():
            cfg.params(k)
    except ValueError as exc:
        raise ConfigError(f"kappa: {exc}", key="kappa") from None
    return cfg


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply command-line overrides; ``None`` values are ignored."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    if not changes:
        return cfg
    explicit = cfg.explicit | frozenset(changes)
    return validate(replace(cfg, explicit=explicit, **changes))
