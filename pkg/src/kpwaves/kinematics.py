"""Profile velocities, the scaling map, physical-frame conversion and flow velocity."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    AlphaSign, BreatherParams, BreatherSuperpositionParams, Family, PhysicalContext,
    SolitonWallParams, WallSuperpositionParams, WaveSpec,
)
from .tau import _alpha2_value, _alpha_parts

DEGENERATE_TOL = 1e-12


class VelocityKind(str, enum.Enum):
    UNIQUE = "unique"
    LINE = "line"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class VelocityResult:
    """Unique velocity, a line of admissible velocities, or a degeneracy."""

    kind: VelocityKind
    vx: float = math.nan
    vy: float = math.nan
    direction: tuple[float, float] | None = None
    reason: str = ""

    @classmethod
    def unique(cls, vx, vy):
        return cls(VelocityKind.UNIQUE, float(vx), float(vy))

    @classmethod
    def line(cls, base, direction):
        d = np.asarray(direction, dtype=float)
        d = d / np.hypot(*d)
        return cls(VelocityKind.LINE, float(base[0]), float(base[1]), (float(d[0]), float(d[1])))

    @classmethod
    def degenerate(cls, reason):
        return cls(VelocityKind.DEGENERATE, reason=reason)

    @property
    def velocity(self):
        return (self.vx, self.vy)

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind is VelocityKind.DEGENERATE:
            out["reason"] = self.reason
        else:
            out.update(vx=self.vx, vy=self.vy)
        if self.direction is not None:
            out["direction"] = list(self.direction)
        return out


# ------------------------------------------------------------------- walls

def wall_speed_term(p, q, alpha2):
    return (p + q) ** 2 + 3.0 * alpha2 * (p - q) ** 2


def wall_velocity(params: SolitonWallParams, alpha) -> VelocityResult:
    """Velocities of a single wall form a line: v_x + (q - p) v_y = D."""
    p, q = params.p, params.q
    if p + q == 0:
        raise ZeroDivisionError("p + q = 0")
    D = wall_speed_term(p, q, _alpha2_value(alpha))
    return VelocityResult.line((D, 0.0), (p - q, 1.0))


def wall_constraint_residual(params: SolitonWallParams, alpha, vx, vy) -> float:
    """Residual of v_x/D + (q - p) v_y/D = 1."""
    p, q = params.p, params.q
    D = wall_speed_term(p, q, _alpha2_value(alpha))
    return vx / D + (q - p) * vy / D - 1.0


def two_wall_system(w1: SolitonWallParams, w2: SolitonWallParams, alpha):
    a2 = _alpha2_value(alpha)
    A = np.array([[1.0, w1.q - w1.p], [1.0, w2.q - w2.p]])
    b = np.array([wall_speed_term(w1.p, w1.q, a2), wall_speed_term(w2.p, w2.q, a2)])
    return A, b


def two_wall_velocity(w1: SolitonWallParams, w2: SolitonWallParams, alpha) -> VelocityResult:
    """Unique velocity of a two-wall superposition unless the walls are parallel."""
    d1, d2 = w1.p - w1.q, w2.p - w2.q
    if abs(d1 - d2) <= DEGENERATE_TOL * max(1.0, abs(d1), abs(d2)):
        return VelocityResult.degenerate("parallel wall directions")
    A, b = two_wall_system(w1, w2, alpha)
    vy = (b[0] - b[1]) / (A[0, 1] - A[1, 1])
    vx = b[0] - A[0, 1] * vy
    return VelocityResult.unique(vx, vy)


# --------------------------------------------------------------- breathers

def breather_system(params: BreatherParams, alpha, cleared: bool = False):
    """Linear system ``A v = b`` for a breather's profile velocity.

    The printed systems are divided through by cos(alpha chi) (harmonic),
    cosh(alpha chi) (hyperbolic) or sinh(chi) (cosh family).  ``cleared``
    returns the first row before that division, which stays finite at the
    points where the printed row blows up.
    """
    a2 = _alpha2_value(alpha)
    lam, mu = params.lam, params.mu
    E, O = _alpha_parts(a2, params.chi, params.family)
    if params.family is Family.HARMONIC:
        row = [E, 2.0 * (lam * O - mu * E)]
        rhs = -12.0 * (lam * lam * E - a2 * mu * mu * E + 2.0 * a2 * lam * mu * O)
        row2, rhs2 = [1.0, -2.0 * mu], -4.0 * (lam * lam - 3.0 * a2 * mu * mu)
    else:
        row = [E, -2.0 * (lam * O + mu * E)]
        rhs = 12.0 * (lam * lam * E + a2 * mu * mu * E + 2.0 * a2 * lam * mu * O)
        row2, rhs2 = [1.0, -2.0 * mu], 4.0 * (lam * lam + 3.0 * a2 * mu * mu)
    if not cleared:
        with np.errstate(divide="ignore", invalid="ignore"):
            row = [np.float64(r) / E for r in row]
            rhs = np.float64(rhs) / E
    return np.array([row, row2], dtype=float), np.array([rhs, rhs2], dtype=float)


def breather_velocity(params: BreatherParams, alpha) -> VelocityResult:
    """Closed-form profile velocity of a single breather.

    E/O stands for alpha/tan(alpha chi) (harmonic), alpha/tanh(alpha chi)
    (hyperbolic) or alpha tanh(alpha chi) (cosh family), written without
    complex alpha.
    """
    a2 = _alpha2_value(alpha)
    lam, mu = params.lam, params.mu
    E, O = _alpha_parts(a2, params.chi, params.family)
    fam = params.family
    if fam is Family.COSH:
        r = E / O  # alpha tanh(alpha chi)
        return VelocityResult.unique(4 * lam ** 2 - 12 * a2 * mu ** 2 - 8 * lam * mu * r,
                                     -4 * lam * r - 12 * a2 * mu)
    if lam * O == 0:
        return VelocityResult.degenerate("infinite lateral speed at chi = 0")
    c = E / O
    if fam is Family.HARMONIC:
        return VelocityResult.unique(-12 * a2 * mu ** 2 - 4 * lam ** 2 - 8 * lam * mu * c,
                                     -12 * a2 * mu - 4 * lam * c)
    return VelocityResult.unique(4 * lam ** 2 - 12 * a2 * mu ** 2 - 8 * lam * mu * c,
                                 -4 * lam * c - 12 * a2 * mu)


def system_residual(A, b, v) -> float:
    """Relative residual max|A v - b| / max(|A||v|, |b|)."""
    v = np.asarray(v, dtype=float)
    r = A @ v - b
    scale = max(float(np.max(np.abs(A) @ np.abs(v))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(r)) / scale)


def harmonic_line_report(params: BreatherParams, alpha) -> str:
    """Describe the far-field drift and singular-line motion of a harmonic breather."""
    if params.family is not Family.HARMONIC:
        raise ValueError("harmonic breather required")
    a2 = _alpha2_value(alpha)
    lam, mu = params.lam, params.mu
    E, O = _alpha_parts(a2, params.chi, params.family)
    n = math.sqrt(1 + 4 * mu * mu)
    lines = [
        f"oscillation direction ({1 / n:.6g}, {-2 * mu / n:.6g}) "
        f"speed {(12 * a2 * mu * mu - 4 * lam * lam) / n:.6g}",
    ]
    if E == 0:
        lines.append("singular line: cos(alpha chi) = 0, no bounding line")
    else:
        k = lam * O / E - mu
        m = math.sqrt(1 + 4 * k * k)
        speed = -12 * (lam * lam - a2 * mu * mu + 2 * a2 * lam * mu * O / E) / m
        lines.append(f"singular line within distance {1 / (2 * abs(lam * E)):.6g} of "
                     f"{params.rho / E:.6g} + x + {2 * k:.6g} y + "
                     f"{12 * (lam * lam - a2 * mu * mu + 2 * a2 * lam * mu * O / E):.6g} t = 0")
        lines.append(f"line direction ({1 / m:.6g}, {2 * k / m:.6g}) speed {speed:.6g}")
    return "\n".join(lines)


def spec_velocity(spec: WaveSpec) -> VelocityResult:
    """Velocity for any spec where one is defined."""
    prm = spec.params
    if isinstance(prm, SolitonWallParams):
        return wall_velocity(prm, spec.alpha)
    if isinstance(prm, BreatherParams):
        return breather_velocity(prm, spec.alpha)
    if isinstance(prm, WallSuperpositionParams):
        if len(prm) == 1:
            return wall_velocity(prm.walls[0], spec.alpha)
        if len(prm) == 2:
            return two_wall_velocity(*prm.walls, spec.alpha)
    if isinstance(prm, BreatherSuperpositionParams) and len(prm) == 1:
        return breather_velocity(prm.breathers[0], prm.alpha)
    return VelocityResult.degenerate("no velocity defined for this superposition")


# ---------------------------------------------------------------- scaling

def _scale_breather(b: BreatherParams, d: float) -> BreatherParams:
    return replace(b, lam=b.lam / d, mu=b.mu / d, rho=b.rho * d)


def _scale_wall(w: SolitonWallParams, d: float) -> SolitonWallParams:
    return SolitonWallParams(w.p / d, w.q / d, w.c / d)


def scale_spec(spec: WaveSpec, delta: float) -> WaveSpec:
    """Rescale parameters so that f_new(x, y, t) = delta^-2 f(x/delta, y/delta^2, t/delta^3).

    lambda and mu (or p and q) are divided by delta; rho is multiplied and c
    divided by delta so that the identity holds exactly, not only up to a shift.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    prm = spec.params
    if isinstance(prm, SolitonWallParams):
        new = _scale_wall(prm, delta)
    elif isinstance(prm, WallSuperpositionParams):
        new = WallSuperpositionParams(tuple(_scale_wall(w, delta) for w in prm.walls))
    elif isinstance(prm, BreatherParams):
        new = _scale_breather(prm, delta)
    else:
        new = replace(prm, breathers=tuple(_scale_breather(b, delta) for b in prm.breathers))
    return spec.replace(params=new)


SCALE_EXPONENT = 2


def scale_velocity(v: VelocityResult, delta: float) -> VelocityResult:
    if v.kind is VelocityKind.DEGENERATE:
        return v
    return replace(v, vx=v.vx / delta ** 2, vy=v.vy / delta)


# ----------------------------------------------------------- frame maps

@dataclass(frozen=True)
class FrameMap:
    """Change of variables between the KP frame and physical coordinates."""

    ctx: PhysicalContext

    def __post_init__(self):
        a2 = self.ctx.alpha2_phys
        if not math.isfinite(a2) or a2 == 0:
            raise ValueError("physical alpha^2 is not finite")

    @property
    def alpha2(self) -> float:
        return self.ctx.alpha2_phys

    @property
    def c0(self) -> float:
        return math.sqrt(self.ctx.g * self.ctx.h)


def to_physical(point, f_value, fmap: FrameMap):
    """Map (x, y, t) and f to (x', y', t', eta0, surface height)."""
    x, y, t = (np.asarray(v, dtype=float) for v in point)
    a2, eps = fmap.alpha2, fmap.ctx.epsilon
    tp = 3.0 * a2 * t / fmap.c0
    xp = x + 3.0 * a2 * t
    yp = y / math.sqrt(2.0)
    eta0 = 4.0 * np.asarray(f_value, dtype=float) / (3.0 * eps * a2)
    return xp, yp, tp, eta0, eps * fmap.ctx.h * eta0


def from_physical(point_prime, eta0, fmap: FrameMap):
    """Inverse of :func:`to_physical`: returns (x, y, t, f)."""
    xp, yp, tp = (np.asarray(v, dtype=float) for v in point_prime)
    a2, eps = fmap.alpha2, fmap.ctx.epsilon
    t = fmap.c0 * tp / (3.0 * a2)
    x = xp - fmap.c0 * tp
    y = yp * math.sqrt(2.0)
    f = 3.0 * eps * a2 * np.asarray(eta0, dtype=float) / 4.0
    return x, y, t, f


def flow_velocity(eta0, d_eta0_dxprime, zprime, ctx: PhysicalContext):
    """Leading-order fluid velocity (u_x, u_z) at depth z' below the surface."""
    zprime = np.asarray(zprime, dtype=float)
    if np.any(zprime < -ctx.h):
        raise ValueError("z' lies below the bottom")
    c0 = math.sqrt(ctx.g * ctx.h)
    ux = ctx.epsilon * c0 * np.asarray(eta0, dtype=float)
    uz = -ctx.epsilon * (ctx.h + zprime) * c0 * np.asarray(d_eta0_dxprime, dtype=float)
    return ux, uz
