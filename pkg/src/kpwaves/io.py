"""Grid export (CSV and plain PGM) and contour bands.

CSV: header ``x,y,value,masked`` then one row per cell, rows of constant y
in increasing y, x increasing within a row.  Floats use 17 significant
digits, which round-trips binary64 exactly.

PGM: plain ``P2`` with maxval 65535.  The first image row is the largest y so
the picture has y pointing up.  Unmasked values are mapped affinely from
[min, max] to 0..65535; masked cells are 0; a constant field maps to 32768.
Comment lines record the window, the mapping, and the masked level; no
line is longer than 70 characters.
"""

from __future__ import annotations

import io as _io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import GridSpec
from .solutions import Field

PGM_MAX = 65535
PGM_MID = 32768
_LINE = 70


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def export_csv(fld: Field) -> bytes:
    xs, ys = fld.grid.axes()
    buf = _io.StringIO()
    buf.write("x,y,value,masked\n")
    for i, y in enumerate(ys):
        sy = _fmt(y)
        for j, x in enumerate(xs):
            buf.write(f"{_fmt(x)},{sy},{_fmt(fld.values[i, j])},"
                      f"{'true' if fld.singular_mask[i, j] else 'false'}\n")
    return buf.getvalue().encode("ascii")


def pgm_levels(fld: Field):
    """Integer gray levels (ny, nx) with y increasing upward, plus (lo, hi)."""
    v = fld.values
    ok = ~fld.singular_mask & np.isfinite(v)
    if not ok.any():
        return np.zeros(v.shape, dtype=np.int64), (None, None)
    lo, hi = float(v[ok].min()), float(v[ok].max())
    if hi > lo:
        lev = np.rint((np.where(ok, v, lo) - lo) / (hi - lo) * PGM_MAX)
        lev = np.clip(lev, 0, PGM_MAX).astype(np.int64)
    else:
        lev = np.full(v.shape, PGM_MID, dtype=np.int64)
    lev[~ok] = 0
    return lev[::-1], (lo, hi)


def export_pgm(fld: Field) -> bytes:
    lev, (lo, hi) = pgm_levels(fld)
    ny, nx = lev.shape
    g = fld.grid
    lines = ["P2",
             f"# quantity {fld.quantity}",
             f"# x {_fmt(g.x_min)} {_fmt(g.x_max)}",
             f"# y {_fmt(g.y_min)} {_fmt(g.y_max)}",
             f"# t {_fmt(g.t)}",
             "# masked 0"]
    if lo is None:
        lines.append("# map none (all cells masked)")
    elif hi > lo:
        lines += [f"# map lo {_fmt(lo)}", f"# map hi {_fmt(hi)}",
                  f"# map value = lo + level * (hi - lo) / {PGM_MAX}"]
    else:
        lines.append(f"# map constant {_fmt(lo)} -> {PGM_MID}")
    lines += [f"{nx} {ny}", str(PGM_MAX)]
    for row in lev:
        cur = ""
        for tok in map(str, row):
            if cur and len(cur) + 1 + len(tok) > _LINE:
                lines.append(cur)
                cur = tok
            else:
                cur = f"{cur} {tok}" if cur else tok
        lines.append(cur)
    return ("\n".join(lines) + "\n").encode("ascii")


def export_grid(fld: Field, fmt: str = "csv") -> bytes:
    fmt = fmt.lower()
    if fmt == "csv":
        return export_csv(fld)
    if fmt == "pgm":
        return export_pgm(fld)
    raise ValueError(f"unknown export format {fmt!r}")


def write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(data) -> Field:
    """Rebuild a Field from :func:`export_csv` output (grid inferred, t unknown)."""
    text = data.decode("ascii") if isinstance(data, bytes) else data
    rows = text.strip().splitlines()
    if not rows or rows[0].strip() != "x,y,value,masked":
        raise ValueError("missing CSV header")
    recs = [r.split(",") for r in rows[1:]]
    x = np.array([float(r[0]) for r in recs])
    y = np.array([float(r[1]) for r in recs])
    vals = np.array([float(r[2]) for r in recs])
    mask = np.array([r[3].strip() == "true" for r in recs])
    xs = np.unique(x)
    ys = np.unique(y)
    nx, ny = xs.size, ys.size
    grid = GridSpec(float(xs[0]), float(xs[-1]), float(ys[0]), float(ys[-1]), nx, ny)
    return Field(grid, vals.reshape(ny, nx), mask.reshape(ny, nx))


def read_pgm(data) -> tuple[np.ndarray, list[str]]:
    """Parse plain PGM into (levels as stored, comment lines)."""
    text = data.decode("ascii") if isinstance(data, bytes) else data
    comments, tokens = [], []
    for line in text.splitlines():
        if line.startswith("#"):
            comments.append(line[1:].strip())
        else:
            tokens += line.split()
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM")
    nx, ny, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    lev = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    return lev.reshape(ny, nx), comments


# ------------------------------------------------------------ contour band

@dataclass(frozen=True)
class ContourBand:
    lower: float
    upper: float
    cells: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.cells)


def contour_band(fld: Field, lower: float, upper: float) -> ContourBand:
    """Unmasked cells (i, j) with lower < value < upper."""
    if not lower < upper:
        raise ValueError("lower must be below upper")
    v = fld.values
    inside = (v > lower) & (v < upper) & ~fld.singular_mask
    ii, jj = np.nonzero(inside)
    return ContourBand(float(lower), float(upper), [(int(i), int(j)) for i, j in zip(ii, jj)])
