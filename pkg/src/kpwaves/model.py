"""Parameter types, validation and the JSON parameter-file format.

Every solution family is described by an immutable dataclass.  A complete
description (family, sign of alpha squared, parameters, optional grid and
physical context) is a :class:`WaveSpec`.

Parameter file layout::

    {
      "family": "Hyperbolic",            # Wall | Harmonic | Hyperbolic | Cosh
      "alpha_squared": 1,                # +1 or -1
      "coupling": "gram",                # superpositions only: gram | printed
      "params": [ {...}, {...} ],        # object -> single, array -> determinant
      "grid": {"x_min": -15, "x_max": 15, "y_min": -15, "y_max": 15,
               "nx": 300, "ny": 300, "t": 0.0},
      "physical": {"g": 9.81, "h": 50.0, "rho_density": 1025.0,
                   "s_tension": 0.0, "epsilon": 0.1}
    }

Wall entries carry ``p``, ``q``, ``c``; breather entries carry ``lambda``,
``mu``, ``chi``, ``gamma``, ``rho`` and optionally ``gamma_half_pi_shift``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Union

__all__ = [
    "Family", "Coupling", "AlphaSign", "SolitonWallParams",
    "WallSuperpositionParams", "BreatherParams", "BreatherSuperpositionParams",
    "GridSpec", "PhysicalContext", "WaveSpec", "ValidationReport",
    "SpecParseError", "validate", "load_spec", "save_spec", "read_spec",
]

# relative size below which a denominator counts as zero
DENOMINATOR_TOL = 1e-12


class Family(str, enum.Enum):
    WALL = "Wall"
    HARMONIC = "Harmonic"
    HYPERBOLIC = "Hyperbolic"
    COSH = "Cosh"


class Coupling(str, enum.Enum):
    """Off-diagonal phase convention of breather determinants.

    ``GRAM`` carries the chi-dependent phase offsets that make the determinant
    an exact KP solution for every chi; ``PRINTED`` drops them and coincides
    with ``GRAM`` when all chi vanish.
    """

    GRAM = "gram"
    PRINTED = "printed"


@dataclass(frozen=True)
class AlphaSign:
    alpha_squared: int = 1

    def __post_init__(self):
        if isinstance(self.alpha_squared, bool) or not isinstance(self.alpha_squared, int):
            raise TypeError("alpha_squared must be an integer")


@dataclass(frozen=True)
class SolitonWallParams:
    p: float
    q: float
    c: float


@dataclass(frozen=True)
class WallSuperpositionParams:
    walls: tuple[SolitonWallParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "walls", tuple(self.walls))

    def __len__(self):
        return len(self.walls)


@dataclass(frozen=True)
class BreatherParams:
    lam: float
    mu: float
    chi: float
    gamma: float = 0.0
    rho: float = 0.0
    gamma_half_pi_shift: bool = False
    family: Family = Family.HARMONIC


@dataclass(frozen=True)
class BreatherSuperpositionParams:
    breathers: tuple[BreatherParams, ...]
    alpha: AlphaSign = AlphaSign(1)
    coupling: Coupling = Coupling.GRAM

    def __post_init__(self):
        object.__setattr__(self, "breathers", tuple(self.breathers))

    def __len__(self):
        return len(self.breathers)

    @property
    def family(self) -> Family:
        return self.breathers[0].family


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    t: float = 0.0

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    def axes(self):
        import numpy as np

        return (np.linspace(self.x_min, self.x_max, self.nx),
                np.linspace(self.y_min, self.y_max, self.ny))

    def with_t(self, t: float) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny, float(t))


@dataclass(frozen=True)
class PhysicalContext:
    g: float = 9.81
    h: float = 1.0
    rho_density: float = 1000.0
    s_tension: float = 0.0
    epsilon: float = 0.1

    @property
    def alpha2_phys(self) -> float:
        """2 rho g / (rho g h^2 - 3 s); units 1/m^2."""
        return 2.0 * self.rho_density * self.g / (
            self.rho_density * self.g * self.h ** 2 - 3.0 * self.s_tension)

    @property
    def shallow_speed(self) -> float:
        return math.sqrt(self.g * self.h)


Params = Union[SolitonWallParams, WallSuperpositionParams, BreatherParams,
               BreatherSuperpositionParams]


@dataclass(frozen=True)
class WaveSpec:
    family: Family
    alpha: AlphaSign
    params: Params
    grid: GridSpec | None = None
    physical: PhysicalContext | None = None

    @property
    def alpha2(self) -> int:
        return self.alpha.alpha_squared

    @property
    def is_superposition(self) -> bool:
        return isinstance(self.params, (WallSuperpositionParams, BreatherSuperpositionParams))

    def replace(self, **changes) -> "WaveSpec":
        import dataclasses

        return dataclasses.replace(self, **changes)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


class SpecParseError(ValueError):
    """Malformed parameter document; ``where`` names the line or field."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


# ---------------------------------------------------------------- validation

def _finite(*values) -> bool:
    return all(isinstance(v, (int, float)) and math.isfinite(v) for v in values)


def _tiny(den: float, scale: float) -> bool:
    return abs(den) <= DENOMINATOR_TOL * max(scale, 1e-300)


def _check_wall(w: SolitonWallParams, where: str, out: ValidationReport):
    if not _finite(w.p, w.q, w.c):
        out.violations.append(f"{where}: non-finite parameter")
        return
    if _tiny(w.p + w.q, abs(w.p) + abs(w.q)):
        out.violations.append(f"{where}: p+q = 0")


def _check_breather(b: BreatherParams, alpha2: int, where: str, out: ValidationReport):
    if not _finite(b.lam, b.mu, b.chi, b.gamma, b.rho):
        out.violations.append(f"{where}: non-finite parameter")
        return
    if b.lam == 0:
        out.violations.append(f"{where}: λ = 0")
    if b.family is Family.COSH and alpha2 < 0:
        out.violations.append(f"{where}: Cosh family requires alpha_squared = +1")


def validate(spec: WaveSpec) -> ValidationReport:
    """Collect every violated invariant of ``spec``; never raises."""
    out = ValidationReport()
    try:
        _validate_into(spec, out)
        if spec.grid is not None:
            out.violations.extend(validate_grid(spec.grid).violations)
        if spec.physical is not None:
            out.violations.extend(validate_physical(spec.physical).violations)
    except Exception as exc:  # malformed objects still yield a report
        out.violations.append(f"unexpected structure: {exc!r}")
    return out


def _validate_into(spec: WaveSpec, out: ValidationReport):
    a2 = spec.alpha.alpha_squared
    if a2 not in (1, -1):
        out.violations.append(f"alpha_squared = {a2}, expected +1 or -1")
    prm = spec.params

    if spec.family is Family.WALL:
        if isinstance(prm, SolitonWallParams):
            _check_wall(prm, "params", out)
        elif isinstance(prm, WallSuperpositionParams):
            if len(prm.walls) < 1:
                out.violations.append("params: at least one wall required")
            for i, w in enumerate(prm.walls):
                _check_wall(w, f"params[{i}]", out)
            for m, wm in enumerate(prm.walls):
                for n, wn in enumerate(prm.walls):
                    if _finite(wn.p, wm.q) and _tiny(wn.p + wm.q, abs(wn.p) + abs(wm.q)):
                        out.violations.append(f"params: p_{n} + q_{m} = 0")
            if len(prm.walls) >= 2 and a2 == -1:
                out.warnings.append(
                    "wall superpositions with alpha_squared = -1 are not exact KP solutions")
        else:
            out.violations.append("Wall family needs wall parameters")
        return

    if isinstance(prm, BreatherParams):
        if prm.family is not spec.family:
            out.violations.append(f"params: family {prm.family.value} != {spec.family.value}")
        _check_breather(prm, a2, "params", out)
        return
    if not isinstance(prm, BreatherSuperpositionParams):
        out.violations.append(f"{spec.family.value} family needs breather parameters")
        return

    if prm.alpha.alpha_squared != a2:
        out.violations.append("params: alpha of the superposition differs from the spec")
    if len(prm.breathers) < 1:
        out.violations.append("params: at least one breather required")
        return
    for i, b in enumerate(prm.breathers):
        if b.family is not spec.family:
            out.violations.append(f"params[{i}]: family {b.family.value} != {spec.family.value}")
        _check_breather(b, a2, f"params[{i}]", out)
    if spec.family is Family.COSH and len(prm.breathers) > 1:
        out.violations.append("params: no determinant formula exists for the Cosh family")
    shifts = {b.gamma_half_pi_shift for b in prm.breathers}
    if spec.family is Family.HYPERBOLIC and len(shifts) > 1:
        out.violations.append(
            "params: gamma_half_pi_shift must be uniform across a hyperbolic superposition")
    for n, bn in enumerate(prm.breathers):
        for k, bk in enumerate(prm.breathers):
            if k <= n or not _finite(bn.lam, bk.lam, bn.mu, bk.mu):
                continue
            dmu2 = a2 * (bn.mu - bk.mu) ** 2
            scale = abs(dmu2) + (abs(bn.lam) + abs(bk.lam)) ** 2
            for sgn, label in ((-1, "-"), (1, "+")):
                lam2 = (bn.lam + sgn * bk.lam) ** 2
                den = dmu2 + lam2 if spec.family is Family.HARMONIC else dmu2 - lam2
                if _tiny(den, scale):
                    out.violations.append(
                        f"params: zero denominator for pair ({n}, {k}) with λ_n {label} λ_k")


def validate_grid(grid: GridSpec) -> ValidationReport:
    out = ValidationReport()
    if not _finite(grid.x_min, grid.x_max, grid.y_min, grid.y_max, grid.t):
        out.violations.append("grid: non-finite bound")
        return out
    if not grid.x_min < grid.x_max:
        out.violations.append("grid: x_min must be < x_max")
    if not grid.y_min < grid.y_max:
        out.violations.append("grid: y_min must be < y_max")
    if grid.nx < 2 or grid.ny < 2:
        out.violations.append("grid: nx and ny must be >= 2")
    return out


def validate_physical(ctx: PhysicalContext) -> ValidationReport:
    out = ValidationReport()
    if not _finite(ctx.g, ctx.h, ctx.rho_density, ctx.s_tension, ctx.epsilon):
        out.violations.append("physical: non-finite value")
        return out
    if ctx.g <= 0:
        out.violations.append("physical: g must be > 0")
    if ctx.h <= 0:
        out.violations.append("physical: h must be > 0")
    if ctx.rho_density <= 0:
        out.violations.append("physical: rho_density must be > 0")
    if ctx.s_tension < 0:
        out.violations.append("physical: s_tension must be >= 0")
    if ctx.epsilon <= 0:
        out.violations.append("physical: epsilon must be > 0")
    if out.ok:
        rgh2 = ctx.rho_density * ctx.g * ctx.h ** 2
        if _tiny(rgh2 - 3 * ctx.s_tension, rgh2):
            out.violations.append("physical: rho g h^2 = 3 s makes alpha^2 infinite")
    return out


# --------------------------------------------------------------- parsing

_WALL_KEYS = ("p", "q", "c")
_BREATHER_KEYS = ("lambda", "mu", "chi", "gamma", "rho")
_GRID_KEYS = ("x_min", "x_max", "y_min", "y_max", "nx", "ny", "t")
_PHYS_KEYS = ("g", "h", "rho_density", "s_tension", "epsilon")


def _number(obj: dict, key: str, where: str, default=None) -> float:
    if key not in obj:
        if default is not None:
            return default
        raise SpecParseError("missing required number", f"{where}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecParseError(f"expected a number, got {v!r}", f"{where}.{key}")
    return float(v)


def _integer(obj: dict, key: str, where: str) -> int:
    if key not in obj:
        raise SpecParseError("missing required integer", f"{where}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise SpecParseError(f"expected an integer, got {v!r}", f"{where}.{key}")
    return v


def _object(v, where: str) -> dict:
    if not isinstance(v, dict):
        raise SpecParseError(f"expected an object, got {type(v).__name__}", where)
    return v


def _unknown_keys(obj: dict, allowed, where: str):
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise SpecParseError(f"unknown key(s) {extra}", where)


def _parse_wall(obj, where) -> SolitonWallParams:
    obj = _object(obj, where)
    _unknown_keys(obj, _WALL_KEYS, where)
    return SolitonWallParams(*(_number(obj, k, where) for k in _WALL_KEYS))


def _parse_breather(obj, family: Family, where) -> BreatherParams:
    obj = _object(obj, where)
    _unknown_keys(obj, _BREATHER_KEYS + ("gamma_half_pi_shift",), where)
    shift = obj.get("gamma_half_pi_shift", False)
    if not isinstance(shift, bool):
        raise SpecParseError(f"expected true/false, got {shift!r}", f"{where}.gamma_half_pi_shift")
    return BreatherParams(
        lam=_number(obj, "lambda", where),
        mu=_number(obj, "mu", where),
        chi=_number(obj, "chi", where),
        gamma=_number(obj, "gamma", where, 0.0),
        rho=_number(obj, "rho", where, 0.0),
        gamma_half_pi_shift=shift,
        family=family,
    )


def load_spec(text: str) -> WaveSpec:
    """Parse a parameter document.

    Raises :class:`SpecParseError` with a line/column or dotted field path.
    Semantic invariants are not checked here; call :func:`validate`.
    """
    if not text.strip():
        raise SpecParseError("empty document", "line 1")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    doc = _object(doc, "document")
    _unknown_keys(doc, ("family", "alpha_squared", "coupling", "params", "grid", "physical"),
                  "document")

    name = doc.get("family")
    if name is None:
        raise SpecParseError("missing family", "family")
    try:
        family = Family(name)
    except ValueError:
        known = ", ".join(f.value for f in Family)
        raise SpecParseError(f"unknown family {name!r} (known: {known})", "family") from None
    alpha = AlphaSign(_integer(doc, "alpha_squared", "document"))

    if "params" not in doc:
        raise SpecParseError("missing params", "params")
    raw = doc["params"]
    if isinstance(raw, list):
        if family is Family.WALL:
            params = WallSuperpositionParams(
                tuple(_parse_wall(o, f"params[{i}]") for i, o in enumerate(raw)))
        else:
            coupling = doc.get("coupling", Coupling.GRAM.value)
            try:
                coupling = Coupling(coupling)
            except ValueError:
                raise SpecParseError(f"unknown coupling {coupling!r}", "coupling") from None
            params = BreatherSuperpositionParams(
                tuple(_parse_breather(o, family, f"params[{i}]") for i, o in enumerate(raw)),
                alpha, coupling)
    else:
        params = (_parse_wall(raw, "params") if family is Family.WALL
                  else _parse_breather(raw, family, "params"))

    grid = None
    if doc.get("grid") is not None:
        g = _object(doc["grid"], "grid")
        _unknown_keys(g, _GRID_KEYS, "grid")
        grid = GridSpec(_number(g, "x_min", "grid"), _number(g, "x_max", "grid"),
                        _number(g, "y_min", "grid"), _number(g, "y_max", "grid"),
                        _integer(g, "nx", "grid"), _integer(g, "ny", "grid"),
                        _number(g, "t", "grid", 0.0))
    physical = None
    if doc.get("physical") is not None:
        p = _object(doc["physical"], "physical")
        _unknown_keys(p, _PHYS_KEYS, "physical")
        physical = PhysicalContext(*(_number(p, k, "physical") for k in _PHYS_KEYS))
    return WaveSpec(family, alpha, params, grid, physical)


def read_spec(path) -> WaveSpec:
    with open(path, encoding="utf-8") as fh:
        return load_spec(fh.read())


def _wall_dict(w: SolitonWallParams) -> dict:
    return {"p": w.p, "q": w.q, "c": w.c}


def _breather_dict(b: BreatherParams) -> dict:
    d = {"lambda": b.lam, "mu": b.mu, "chi": b.chi, "gamma": b.gamma, "rho": b.rho}
    if b.gamma_half_pi_shift:
        d["gamma_half_pi_shift"] = True
    return d


def spec_to_dict(spec: WaveSpec) -> dict:
    prm = spec.params
    doc: dict = {"family": spec.family.value, "alpha_squared": spec.alpha.alpha_squared}
    if isinstance(prm, SolitonWallParams):
        doc["params"] = _wall_dict(prm)
    elif isinstance(prm, WallSuperpositionParams):
        doc["params"] = [_wall_dict(w) for w in prm.walls]
    elif isinstance(prm, BreatherParams):
        doc["params"] = _breather_dict(prm)
    else:
        doc["coupling"] = prm.coupling.value
        doc["params"] = [_breather_dict(b) for b in prm.breathers]
    if spec.grid is not None:
        g = spec.grid
        doc["grid"] = {"x_min": g.x_min, "x_max": g.x_max, "y_min": g.y_min,
                       "y_max": g.y_max, "nx": g.nx, "ny": g.ny, "t": g.t}
    if spec.physical is not None:
        c = spec.physical
        doc["physical"] = {"g": c.g, "h": c.h, "rho_density": c.rho_density,
                           "s_tension": c.s_tension, "epsilon": c.epsilon}
    return doc


def save_spec(spec: WaveSpec) -> str:
    """Serialize to the parameter-file format (floats in repr form)."""
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"
