"""Solution values f = 2 d^2/dx^2 ln tau, their regularisations, and grid sampling."""

from __future__ import annotations

import enum
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import BreatherParams, Family, GridSpec, WaveSpec
from .tau import TauEvaluation, evaluate_tau

NEG_LIMIT = -np.log(np.log(2.0) + 1.0)


class QuantityKind(str, enum.Enum):
    RAW = "raw"
    LOG = "log"
    CLAMP = "clamp"


@dataclass(frozen=True)
class Quantity:
    """What a Field holds: raw f, the log regularisation, or f clamped at M."""

    kind: QuantityKind = QuantityKind.RAW
    M: float | None = None

    def __post_init__(self):
        if self.kind is QuantityKind.CLAMP:
            if self.M is None or not np.isfinite(self.M) or self.M <= 0:
                raise ValueError("clamp level M must be a positive finite number")
        elif self.M is not None:
            raise ValueError(f"{self.kind.value} takes no clamp level")

    @classmethod
    def parse(cls, text: str) -> "Quantity":
        """Parse ``raw``, ``log`` or ``clamp:<M>``."""
        text = text.strip().lower()
        if text == "raw":
            return cls()
        if text == "log":
            return cls(QuantityKind.LOG)
        if text.startswith("clamp:"):
            try:
                M = float(text[6:])
            except ValueError:
                raise ValueError(f"bad clamp level in {text!r}") from None
            return cls(QuantityKind.CLAMP, M)
        raise ValueError(f"unknown quantity {text!r} (expected raw, log or clamp:<M>)")

    def __str__(self):
        return f"clamp:{self.M:g}" if self.kind is QuantityKind.CLAMP else self.kind.value

    def apply(self, f):
        if self.kind is QuantityKind.LOG:
            return regularize_log(f)
        if self.kind is QuantityKind.CLAMP:
            return clamp_renormalize(f, self.M)
        return f


RAW = Quantity()


class HalfCutSide(str, enum.Enum):
    TAU_POSITIVE = "positive"
    TAU_NEGATIVE = "negative"


@dataclass(frozen=True, eq=False)
class Field:
    """Solution values on a grid at fixed t.

    ``values`` and ``singular_mask`` have shape (ny, nx); row i is y_i.
    ``raw`` keeps unregularised f so other quantities can be derived, and
    ``tau``/``log_scale`` describe the sign structure of tau.
    """

    grid: GridSpec
    values: np.ndarray
    singular_mask: np.ndarray
    quantity: Quantity = RAW
    raw: np.ndarray | None = None
    tau: np.ndarray | None = field(default=None, repr=False)
    log_scale: np.ndarray | None = field(default=None, repr=False)

    @property
    def shape(self):
        return self.values.shape

    def with_quantity(self, quantity: Quantity) -> "Field":
        raw = self.values if self.raw is None else self.raw
        if self.raw is None and self.quantity != RAW:
            raise ValueError("field does not carry raw values")
        return Field(self.grid, quantity.apply(raw), self.singular_mask, quantity, raw,
                     self.tau, self.log_scale)

    def unmasked(self) -> np.ndarray:
        return self.values[~self.singular_mask]

    def global_max(self) -> float:
        v = self.unmasked()
        return float(v.max()) if v.size else float("nan")

    def argmax(self):
        """(x, y, value) of the largest unmasked value."""
        g = np.where(self.singular_mask, -np.inf, self.values)
        i, j = np.unravel_index(np.argmax(g), g.shape)
        x, y = self.grid.axes()
        return float(x[j]), float(y[i]), float(g[i, j])


# ---------------------------------------------------------------- pointwise

def eval_f(spec: WaveSpec, x, y, t, alpha2: float | None = None):
    """Return ``(f, near_singular)``; f is returned even where flagged."""
    ev = evaluate_tau(spec, x, y, t, alpha2=alpha2)
    with np.errstate(all="ignore"):
        f = ev.f()
    return f, ev.near_singular


def eval_half_cut(spec: WaveSpec, side: HalfCutSide | str, x, y, t):
    """f kept on one side of the singular line of a harmonic breather, 0 elsewhere."""
    prm = spec.params
    if not (isinstance(prm, BreatherParams) and prm.family is Family.HARMONIC):
        raise ValueError("half-cut is defined for a single harmonic breather only")
    side = HalfCutSide(side)
    ev = evaluate_tau(spec, x, y, t)
    with np.errstate(all="ignore"):
        f = ev.f()
    keep = np.asarray(ev.tau) > 0 if side is HalfCutSide.TAU_POSITIVE else np.asarray(ev.tau) < 0
    out = np.where(keep, f, 0.0)
    return out.item() if out.ndim == 0 else out


def regularize_log(f):
    """sign(f) ln[ln(|e^f - 1| + 1) + 1], written to avoid overflow.

    For f > 0 this is ln(f + 1); for f < 0 it is -ln(ln(2 - e^f) + 1).
    """
    f = np.asarray(f, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        pos = np.log1p(np.where(f > 0, f, 0.0))
        neg = -np.log1p(np.log1p(-np.expm1(np.where(f < 0, f, 0.0))))
    out = np.where(f > 0, pos, np.where(f < 0, neg, 0.0))
    out = np.where(np.isnan(f), np.nan, out)
    return out.item() if out.ndim == 0 else out


def clamp_renormalize(f, M: float):
    """Log regularisation for f <= 0, identity on (0, M), M above."""
    if not M > 0:
        raise ValueError("M must be positive")
    if M < 1:
        warnings.warn("clamp level below 1", stacklevel=2)
    f = np.asarray(f, dtype=float)
    out = np.where(f <= 0, regularize_log(np.minimum(f, 0.0)), np.minimum(f, M))
    out = np.where(np.isnan(f), np.nan, out)
    return out.item() if out.ndim == 0 else out


# ------------------------------------------------------------------- grids

def _row(spec: WaveSpec, xs, y, t, alpha2):
    # fresh arrays per row so every schedule evaluates identical inputs
    ev = evaluate_tau(spec, xs.copy(), np.full(xs.shape, y), np.full(xs.shape, t), alpha2=alpha2)
    with np.errstate(all="ignore"):
        f = np.asarray(ev.f(), dtype=float)
    return (f, np.asarray(ev.near_singular, dtype=bool), np.asarray(ev.tau, dtype=float),
            np.broadcast_to(np.asarray(ev.log_scale, dtype=float), xs.shape))


def sign_change_band(tau, log_scale=None) -> np.ndarray:
    """Cells where tau changes sign towards a 4-neighbour.

    Of each sign-changing pair the cell with the smaller |tau| is marked,
    giving a band one cell wide along the zero set.
    """
    tau = np.asarray(tau, dtype=float)
    with np.errstate(divide="ignore"):
        mag = np.log(np.abs(tau))
    if log_scale is not None:
        mag = mag + log_scale
    s = np.sign(tau)
    band = np.zeros(tau.shape, dtype=bool)
    for axis in (0, 1):
        a = [slice(None)] * 2
        b = [slice(None)] * 2
        a[axis] = slice(None, -1)
        b[axis] = slice(1, None)
        a, b = tuple(a), tuple(b)
        flip = s[a] * s[b] < 0
        first = flip & (mag[a] <= mag[b])
        second = flip & ~first
        band[a] |= first
        band[b] |= second
    return band


def sample_field(spec: WaveSpec, grid: GridSpec | None = None, quantity: Quantity = RAW,
                 workers: int = 1, alpha2: float | None = None) -> Field:
    """Evaluate f over a grid.

    Rows are evaluated independently (optionally on a thread pool) and written
    to disjoint slices, so the result does not depend on ``workers``.  The mask
    combines the near-singular flag with the sign-change band of tau.
    """
    grid = grid or spec.grid
    if grid is None:
        raise ValueError("no grid given")
    if isinstance(quantity, str):
        quantity = Quantity.parse(quantity)
    xs, ys = grid.axes()
    raw = np.empty((grid.ny, grid.nx))
    mask = np.empty((grid.ny, grid.nx), dtype=bool)
    tau = np.empty((grid.ny, grid.nx))
    scale = np.empty((grid.ny, grid.nx))

    def work(i):
        raw[i], mask[i], tau[i], scale[i] = _row(spec, xs, ys[i], grid.t, alpha2)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(grid.ny)))
    else:
        for i in range(grid.ny):
            work(i)
    mask |= sign_change_band(tau, scale) | ~np.isfinite(raw)
    return Field(grid, quantity.apply(raw), mask, quantity, raw, tau, scale)


def sample_tau(spec: WaveSpec, grid: GridSpec, alpha2: float | None = None):
    """tau over a grid as ``(tau_hat, log_scale)`` with tau = exp(log_scale) tau_hat."""
    xs, ys = grid.axes()
    X, Y = np.meshgrid(xs, ys)
    ev: TauEvaluation = evaluate_tau(spec, X, Y, np.full(X.shape, grid.t), alpha2=alpha2)
    return np.asarray(ev.tau, dtype=float), np.broadcast_to(ev.log_scale, X.shape).astype(float)
