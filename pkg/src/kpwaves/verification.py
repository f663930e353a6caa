"""Finite-difference residuals of the KP equation and extraction of singular curves.

The residual is meshfree: f is evaluated analytically at stencil offsets
around each test point, so the FD step is independent of the grid spacing.
The grid only supplies test points and the singular mask used to exclude
points near tau = 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.ndimage import binary_dilation
from skimage.measure import find_contours

from .kinematics import FrameMap
from .model import GridSpec, PhysicalContext, WaveSpec
from .solutions import sample_tau, sign_change_band
from .tau import evaluate_tau

STENCIL_RADIUS = 1
SAFETY_MARGIN = 5
MIN_STEP = 1e-6

# 4th-order central weights over offsets -3..3 as (integer weights, divisor);
# dividing afterwards keeps the weights exact so constants cancel exactly
_D1 = ((-1, 9, -45, 0, 45, -9, 1), 60)
_D2 = ((2, -27, 270, -490, 270, -27, 2), 180)
_D4 = ((-1, 12, -39, 56, -39, 12, -1), 6)


def _apply(stencil, line, h, order):
    w, den = stencil
    return sum(k * v for k, v in zip(w, line) if k) / (den * h ** order)


@dataclass
class ResidualReport:
    """Norms of the pointwise residual over the included test points."""

    grid: GridSpec
    residual_linf: float
    residual_l2: float
    excluded_cells: int
    fd_step: float
    stencil_order: int = 2
    included_cells: int = 0
    half_step_linf: float | None = None
    half_step_l2: float | None = None
    observed_order: float | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = asdict(self.grid)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualReport":
        d = dict(d)
        d["grid"] = GridSpec(**d["grid"])
        return cls(**d)


def observed_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """log_ratio(coarse / fine); +inf when the fine error is exactly zero."""
    if fine == 0:
        return math.inf if coarse > 0 else math.nan
    if coarse == 0:
        return math.nan
    return math.log(coarse / fine) / math.log(ratio)


# ------------------------------------------------------------- evaluators

FieldFn = Callable[..., object]


def spec_function(spec: WaveSpec, alpha2: float | None = None) -> FieldFn:
    """f(x, y, t) -> (f, near_singular, tau) for a spec."""

    def fn(x, y, t):
        ev = evaluate_tau(spec, x, y, t, alpha2=alpha2)
        with np.errstate(all="ignore"):
            return _float(ev.f()), np.asarray(ev.near_singular), np.asarray(ev.tau, float)

    return fn


def _float(v):
    a = np.asarray(v)
    return a if a.dtype == np.longdouble else a.astype(float)


def _unpack(out, shape):
    if isinstance(out, tuple):
        f = _float(out[0])
        near = np.asarray(out[1], dtype=bool) if len(out) > 1 else np.zeros(shape, bool)
        tau = np.asarray(out[2], dtype=float) if len(out) > 2 else None
    else:
        f, near, tau = _float(out), np.zeros(shape, bool), None
    return np.broadcast_to(f, shape), np.broadcast_to(near, shape), tau


class _Noisy:
    """Adds deterministic noise of a given amplitude to every evaluation."""

    def __init__(self, fn, amplitude, seed=0):
        self.fn, self.amplitude = fn, amplitude
        self.rng = np.random.default_rng(seed)

    def __call__(self, x, y, t):
        f, near, tau = _unpack(self.fn(x, y, t), np.broadcast(x, y, t).shape)
        return f + self.amplitude * self.rng.standard_normal(f.shape), near, tau


def _grid_mask(fn, grid: GridSpec):
    xs, ys = grid.axes()
    X, Y = np.meshgrid(xs, ys)
    f, near, tau = _unpack(fn(X, Y, np.full(X.shape, grid.t)), X.shape)
    mask = near | ~np.isfinite(f)
    if tau is not None:
        mask = mask | sign_change_band(tau.reshape(X.shape))
    return X, Y, mask


def exclusion_mask(mask: np.ndarray, margin: int = SAFETY_MARGIN) -> np.ndarray:
    if not mask.any():
        return mask.copy()
    return binary_dilation(mask, iterations=STENCIL_RADIUS + margin)


def _kp_pointwise(fn, x, y, t, h, alpha2):
    """KP operator f_xt + f_xxxx + 6(f_x^2 + f f_xx) + 3 alpha^2 f_yy at points."""
    ev = lambda dx, dy, dt: _unpack(fn(x + dx, y + dy, t + dt), x.shape)[0]
    line = [ev(k * h, 0.0, 0.0) for k in range(-3, 4)]
    f0 = line[3]
    fx = _apply(_D1, line, h, 1)
    fxx = _apply(_D2, line, h, 2)
    fxxxx = _apply(_D4, line, h, 4)
    fxt = (ev(h, 0, h) - ev(h, 0, -h) - ev(-h, 0, h) + ev(-h, 0, -h)) / (4 * h * h)
    fyy = (ev(0, h, 0) - 2 * f0 + ev(0, -h, 0)) / (h * h)
    return fxt + fxxxx + 6.0 * (fx * fx + f0 * fxx) + 3.0 * alpha2 * fyy


def _norms(r):
    if r.size == 0:
        return math.nan, math.nan
    return float(np.max(np.abs(r))), float(np.sqrt(np.mean(r * r)))


def _residual_report(op, fn, grid, fd_step, margin, extra_warn=()):
    if not fd_step > 0:
        raise ValueError("fd_step must be positive")
    X, Y, mask = _grid_mask(fn, grid)
    excl = exclusion_mask(mask, margin)
    keep = ~excl
    x, y = X[keep], Y[keep]
    t = np.full(x.shape, grid.t)
    warnings = list(extra_warn)
    if fd_step < MIN_STEP:
        warnings.append(f"fd_step {fd_step:g} below {MIN_STEP:g}: cancellation dominates")
    if x.size == 0:
        warnings.append("no included cells")
    # stencils are evaluated in extended precision where available; the
    # 1/h^4 weights would otherwise amplify rounding above truncation
    x, y, t = (v.astype(np.longdouble) for v in (x, y, t))
    r1 = np.asarray(op(fn, x, y, t, fd_step), dtype=float) if x.size else np.empty(0)
    r2 = np.asarray(op(fn, x, y, t, fd_step / 2), dtype=float) if x.size else np.empty(0)
    bad = ~(np.isfinite(r1) & np.isfinite(r2))
    if bad.any():
        warnings.append(f"{int(bad.sum())} non-finite residuals dropped")
        r1, r2 = r1[~bad], r2[~bad]
    l1, q1 = _norms(r1)
    l2, q2 = _norms(r2)
    return ResidualReport(grid=grid, residual_linf=l1, residual_l2=q1,
                          excluded_cells=int(excl.sum()), fd_step=fd_step, stencil_order=2,
                          included_cells=int(r1.size), half_step_linf=l2, half_step_l2=q2,
                          observed_order=observed_order(l1, l2), warnings=warnings)


def kp_residual(source, grid: GridSpec | None = None, fd_step: float = 1e-2,
                alpha2: float | None = None, margin: int = SAFETY_MARGIN,
                noise: float = 0.0, seed: int = 0) -> ResidualReport:
    """FD residual of the KP equation at grid points away from the singular set.

    ``source`` is a WaveSpec or a callable ``(x, y, t) -> f`` (optionally
    returning ``(f, near_singular[, tau])``).  ``noise`` adds deterministic
    random perturbations of that amplitude to every evaluation, which serves as
    a negative control.
    """
    if isinstance(source, WaveSpec):
        grid = grid or source.grid
        a2 = float(source.alpha.alpha_squared if alpha2 is None else alpha2)
        fn = spec_function(source, alpha2)
    else:
        if alpha2 is None:
            raise ValueError("alpha2 is required for a callable source")
        a2, fn = float(alpha2), source
    if grid is None:
        raise ValueError("no grid given")
    if noise:
        fn = _Noisy(fn, noise, seed)
    op = lambda f, x, y, t, h: _kp_pointwise(f, x, y, t, h, a2)
    return _residual_report(op, fn, grid, fd_step, margin)


# ------------------------------------------------------------ physical KP

def physical_eta_function(spec: WaveSpec, fmap: FrameMap, transform_alpha2: float | None = None):
    """eta0(x', y', t') built from the KP solution with alpha^2 = alpha2_phys.

    ``transform_alpha2`` replaces alpha^2 in the change of variables only;
    a wrong value there gives a negative control.
    """
    a2_sol = fmap.alpha2
    a2 = a2_sol if transform_alpha2 is None else float(transform_alpha2)
    c0, eps = fmap.c0, fmap.ctx.epsilon
    inner = spec_function(spec, a2_sol)

    def fn(xp, yp, tp):
        t = c0 * tp / (3.0 * a2)
        f, near, tau = inner(xp - c0 * tp, math.sqrt(2.0) * yp, t)
        return 4.0 * f / (3.0 * eps * a2), near, tau

    return fn


def _physical_pointwise(fn, x, y, t, h, ctx: PhysicalContext):
    ev = lambda dx, dy, dt: _unpack(fn(x + dx, y + dy, t + dt), x.shape)[0]
    line = [ev(k * h, 0.0, 0.0) for k in range(-3, 4)]
    e0 = line[3]
    ex = _apply(_D1, line, h, 1)
    exx = _apply(_D2, line, h, 2)
    exxxx = _apply(_D4, line, h, 4)
    ext = (ev(h, 0, h) - ev(h, 0, -h) - ev(-h, 0, h) + ev(-h, 0, -h)) / (4 * h * h)
    eyy = (ev(0, h, 0) - 2 * e0 + ev(0, -h, 0)) / (h * h)
    c0 = math.sqrt(ctx.g * ctx.h)
    B = (ctx.rho_density * ctx.g * ctx.h ** 2 - 3 * ctx.s_tension) / (6 * ctx.rho_density * ctx.g)
    return (ext / c0 + exx + B * exxxx + 1.5 * ctx.epsilon * (ex * ex + e0 * exx) + 0.5 * eyy)


def physical_kp_residual(spec: WaveSpec, ctx: PhysicalContext, grid: GridSpec,
                         fd_step: float = 1e-2, transform_alpha2: float | None = None,
                         margin: int = SAFETY_MARGIN) -> ResidualReport:
    """FD residual of the dimensional KP equation for eta0 in primed coordinates."""
    fmap = FrameMap(ctx)
    fn = physical_eta_function(spec, fmap, transform_alpha2)
    op = lambda f, x, y, t, h: _physical_pointwise(f, x, y, t, h, ctx)
    return _residual_report(op, fn, grid, fd_step, margin)


# --------------------------------------------------------- singular curve

@dataclass
class SingularCurve:
    """Zero set of tau at fixed t as polylines of (x, y) points."""

    segments: list[np.ndarray]
    t: float = 0.0

    def __len__(self):
        return len(self.segments)

    @property
    def points(self) -> np.ndarray:
        return np.concatenate(self.segments) if self.segments else np.empty((0, 2))


def extract_singular_curve(spec: WaveSpec, grid: GridSpec | None = None) -> SingularCurve:
    """Marching squares on tau with linear interpolation along cell edges."""
    grid = grid or spec.grid
    tau, _ = sample_tau(spec, grid)
    if not (np.any(tau > 0) and np.any(tau < 0)):
        return SingularCurve([], grid.t)
    segs = []
    for c in find_contours(tau, 0.0):
        xy = np.column_stack([grid.x_min + c[:, 1] * grid.dx, grid.y_min + c[:, 0] * grid.dy])
        segs.append(xy)
    return SingularCurve(segs, grid.t)


def max_turning_angle(segment: np.ndarray, stride: int = 1) -> float:
    """Largest angle (radians) between consecutive chords of a polyline."""
    p = np.asarray(segment)[::stride]
    if len(p) < 3:
        return 0.0
    d = np.diff(p, axis=0)
    d = d[np.hypot(d[:, 0], d[:, 1]) > 0]
    a = np.arctan2(d[:, 1], d[:, 0])
    turn = np.abs((np.diff(a) + np.pi) % (2 * np.pi) - np.pi)
    return float(turn.max()) if turn.size else 0.0
