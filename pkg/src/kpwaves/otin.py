"""Time sweeps of breather superpositions and OTIN amplitude events.

An OTIN ("one time intense") event is a short-lived localized spike: the
largest raw value over a peak time window compared with the largest value
over a background window.  Ratios always use raw f, whatever quantity the
frames are rendered with.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import GridSpec, WaveSpec
from .solutions import RAW, Field, Quantity, sample_field

PEAK_HALF_WIDTH = 0.23
DEFAULT_PEAK_TS = tuple(np.linspace(-PEAK_HALF_WIDTH, PEAK_HALF_WIDTH, 9))
_BG = np.linspace(0.3, 1.0, 4)
DEFAULT_BACKGROUND_TS = tuple(np.concatenate([-_BG[::-1], _BG]))
DEFAULT_WINDOW = GridSpec(-15.0, 15.0, -15.0, 15.0, 300, 300, 0.0)
T_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class SweepConfig:
    spec: WaveSpec
    grid: GridSpec
    t_values: tuple[float, ...]
    quantity: Quantity = RAW
    workers: int = 1

    def __post_init__(self):
        ts = tuple(float(t) for t in self.t_values)
        object.__setattr__(self, "t_values", ts)
        if len(ts) < 3:
            raise ValueError("a sweep needs at least 3 time values")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("t values must be strictly increasing")


@dataclass(frozen=True, eq=False)
class SweepFrame:
    t: float
    field: Field
    global_max: float

    @property
    def raw_max(self) -> float:
        raw = self.field.raw if self.field.raw is not None else self.field.values
        v = raw[~self.field.singular_mask]
        return float(v.max()) if v.size else math.nan


def sweep(config: SweepConfig) -> list[SweepFrame]:
    """One Field per time value, each with its unmasked maximum."""
    frames = []
    for t in config.t_values:
        fld = sample_field(config.spec, config.grid.with_t(t), config.quantity,
                           workers=config.workers)
        frames.append(SweepFrame(t, fld, fld.global_max()))
    return frames


def otin_sweep_config(spec: WaveSpec, grid: GridSpec | None = None,
                      peak_ts=DEFAULT_PEAK_TS, background_ts=DEFAULT_BACKGROUND_TS,
                      quantity: Quantity = RAW, workers: int = 1) -> SweepConfig:
    ts = sorted(set(float(t) for t in peak_ts) | set(float(t) for t in background_ts))
    return SweepConfig(spec, grid or spec.grid or DEFAULT_WINDOW, tuple(ts), quantity, workers)


@dataclass(frozen=True)
class OtinEvent:
    t_peak: float
    location: tuple[float, float]
    peak_value: float
    background_value: float
    ratio: float
    t_background: float = math.nan
    background_location: tuple[float, float] = (math.nan, math.nan)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _select(frames, ts, label):
    if len(ts) == 0:
        raise ValueError(f"{label} time set is empty")
    out = []
    for t in ts:
        hit = [fr for fr in frames if abs(fr.t - t) <= T_MATCH_TOL * max(1.0, abs(t))]
        if not hit:
            raise ValueError(f"{label} time {t:g} is not in the sweep")
        out.append(hit[0])
    return out


def _best(frames):
    best = None
    for fr in frames:
        m = fr.raw_max
        if np.isfinite(m) and (best is None or m > best[0]):
            best = (m, fr)
    return best


def _raw_argmax(frame: SweepFrame):
    fld = frame.field
    raw = fld.raw if fld.raw is not None else fld.values
    g = np.where(fld.singular_mask, -np.inf, raw)
    i, j = np.unravel_index(np.argmax(g), g.shape)
    x, y = fld.grid.axes()
    return float(x[j]), float(y[i])


def detect_otin(frames, background_ts=DEFAULT_BACKGROUND_TS,
                peak_ts=DEFAULT_PEAK_TS) -> OtinEvent:
    """Compare the largest raw value in the peak window with the background window."""
    peak = _best(_select(frames, peak_ts, "peak"))
    if peak is None:
        raise ValueError("every cell in the peak window is masked")
    back = _best(_select(frames, background_ts, "background"))
    if back is None:
        raise ValueError("every cell in the background window is masked")
    ratio = peak[0] / back[0] if back[0] != 0 else math.inf
    return OtinEvent(peak[1].t, _raw_argmax(peak[1]), peak[0], back[0], ratio,
                     back[1].t, _raw_argmax(back[1]))


# ------------------------------------------------------------- clustering

@dataclass(frozen=True)
class PeakCluster:
    t: float
    maxima: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.maxima)


def cluster_peaks(fld: Field, threshold_frac: float = 0.5) -> PeakCluster:
    """Strict 8-neighbour local maxima above threshold_frac * global max, descending."""
    if not 0 < threshold_frac < 1:
        raise ValueError("threshold_frac must lie in (0, 1)")
    v = np.where(fld.singular_mask, -np.inf, fld.values)
    finite = np.isfinite(v)
    if not finite.any():
        return PeakCluster(fld.grid.t)
    gmax = v[finite].max()
    pad = np.pad(v, 1, constant_values=-np.inf)
    ny, nx = v.shape
    strict = finite.copy()
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                strict &= v > pad[1 + di:1 + di + ny, 1 + dj:1 + dj + nx]
    strict &= v > threshold_frac * gmax
    xs, ys = fld.grid.axes()
    ii, jj = np.nonzero(strict)
    peaks = sorted(((float(xs[j]), float(ys[i]), float(v[i, j])) for i, j in zip(ii, jj)),
                   key=lambda p: (-p[2], p[1], p[0]))
    return PeakCluster(fld.grid.t, peaks)


def pressure_proxy(series, t=None, at: int | None = None) -> int:
    """Sign of -d(eta)/dt at a sample (default: the middle one).

    -1 flags a rising surface, read as a pressure drop below it.
    """
    s = np.asarray(series, dtype=float)
    if s.size < 3:
        raise ValueError("need at least 3 samples")
    d = np.gradient(s) if t is None else np.gradient(s, np.asarray(t, dtype=float))
    k = s.size // 2 if at is None else at
    return int(-np.sign(d[k]))


def series_at(spec: WaveSpec, x: float, y: float, ts) -> np.ndarray:
    """Raw f at a fixed point over several times."""
    from .solutions import eval_f

    ts = np.asarray(ts, dtype=float)
    f, _ = eval_f(spec, np.full(ts.shape, x), np.full(ts.shape, y), ts)
    return np.asarray(f, dtype=float)


# ----------------------------------------------------------------- export

def export_sweep(frames, outdir, event: OtinEvent | None = None, fmt: str = "pgm") -> list[Path]:
    """Write one grid file per frame plus an ``events.json`` summary."""
    from .io import export_grid, write_bytes

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    summary = {"frames": []}
    for k, fr in enumerate(frames):
        path = out / f"frame_{k:03d}.{fmt}"
        write_bytes(path, export_grid(fr.field, fmt))
        written.append(path)
        summary["frames"].append({"index": k, "t": fr.t, "file": path.name,
                                  "global_max": fr.global_max, "raw_max": fr.raw_max})
    if event is not None:
        summary["event"] = event.to_dict()
    path = out / "events.json"
    write_bytes(path, (json.dumps(summary, indent=2) + "\n").encode())
    written.append(path)
    return written
