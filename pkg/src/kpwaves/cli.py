"""Command-line interface.

Exit codes: 0 success, 1 invalid input (bad arguments, invalid spec,
unknown subcommand), 2 runtime failure (missing or unreadable files,
numerical errors, write failures).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .model import (
    GridSpec, PhysicalContext, SpecParseError, read_spec, save_spec, validate,
    validate_grid, validate_physical,
)

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str, n: int | None = None, what: str = "value") -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad {what}: {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def _grid(text: str, t: float = 0.0) -> GridSpec:
    parts = text.split(",")
    if len(parts) != 6:
        raise UsageError(f"--grid needs x0,x1,y0,y1,nx,ny, got {text!r}")
    try:
        x0, x1, y0, y1 = (float(p) for p in parts[:4])
        nx, ny = int(parts[4]), int(parts[5])
    except ValueError:
        raise UsageError(f"bad --grid {text!r}") from None
    g = GridSpec(x0, x1, y0, y1, nx, ny, t)
    rep = validate_grid(g)
    if not rep.ok:
        raise UsageError("; ".join(rep.violations))
    return g


def _common(p):
    p.add_argument("--spec", help="parameter file (JSON)")
    p.add_argument("--out", help="output path")
    p.add_argument("--quantity", default="raw", help="raw | log | clamp:<M>")
    p.add_argument("--grid", help="x0,x1,y0,y1,nx,ny")
    p.add_argument("--t", help="time value or comma-separated list")
    p.add_argument("--workers", type=int, default=1, help="threads for grid sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kpwaves", description="Singular KP solutions: evaluation, "
                     "verification and OTIN scans.")
    parser.add_argument("--version", action="version", version=f"kpwaves {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate f at a point")
    _common(p)
    p.add_argument("--point", required=True, help="x,y,t")

    p = sub.add_parser("render", help="sample a field and export CSV/PGM plus a PNG figure")
    _common(p)
    p.add_argument("--format", choices=["csv", "pgm", "both"], default=None)
    p.add_argument("--no-figure", action="store_true")

    p = sub.add_parser("residual", help="finite-difference KP residual report")
    _common(p)
    p.add_argument("--fd-step", type=float, default=1e-2)
    p.add_argument("--physical", action="store_true",
                   help="residual of the dimensional equation in primed coordinates")

    p = sub.add_parser("velocity", help="profile velocity")
    _common(p)

    p = sub.add_parser("dispersion", help="exact and KP dispersion table")
    _common(p)
    p.add_argument("--k", default="0.05,0.1,0.2,0.4", help="wave numbers k")
    p.add_argument("--l", type=float, default=0.0)
    _physical_flags(p)

    p = sub.add_parser("otin-scan", help="time sweep and OTIN detection")
    _common(p)
    p.add_argument("--peak-t", help="peak window times")
    p.add_argument("--background-t", help="background window times")
    p.add_argument("--format", choices=["csv", "pgm"], default="pgm")

    p = sub.add_parser("singular-curve", help="zero set of tau")
    _common(p)
    p.add_argument("--no-figure", action="store_true")

    p = sub.add_parser("scale", help="apply the scaling transformation")
    _common(p)
    p.add_argument("--delta", type=float, required=True)

    p = sub.add_parser("to-physical", help="map a KP point and value to physical units")
    _common(p)
    p.add_argument("--point", required=True, help="x,y,t")
    p.add_argument("--f", type=float, help="f value (default: evaluate the spec)")
    _physical_flags(p)
    return parser


def _physical_flags(p):
    for name, default in (("g", None), ("h", None), ("rho-density", None),
                          ("s-tension", None), ("epsilon", None)):
        p.add_argument(f"--{name}", type=float, default=default)


def _context(args, spec=None) -> PhysicalContext:
    base = (spec.physical if spec is not None and spec.physical else PhysicalContext())
    vals = {k: getattr(base, k) for k in ("g", "h", "rho_density", "s_tension", "epsilon")}
    for k in vals:
        v = getattr(args, k, None)
        if v is not None:
            vals[k] = v
    ctx = PhysicalContext(**vals)
    rep = validate_physical(ctx)
    if not rep.ok:
        raise UsageError("; ".join(rep.violations))
    return ctx


def _load(args, required=True):
    if not args.spec:
        if required:
            raise UsageError("--spec is required")
        return None
    path = Path(args.spec)
    if not path.exists():
        raise FileNotFoundError(f"spec file not found: {path}")
    spec = read_spec(path)
    rep = validate(spec)
    if not rep.ok:
        raise UsageError("invalid spec: " + "; ".join(rep.violations))
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return spec


def _times(args, default):
    return _floats(args.t, what="--t") if args.t else [default]


def _grid_for(args, spec, t):
    if args.grid:
        return _grid(args.grid, t)
    if spec.grid is None:
        raise UsageError("no grid: pass --grid or add a grid block to the spec")
    return spec.grid.with_t(t)


def _emit(text: str, out):
    if out:
        from .io import write_bytes

        write_bytes(out, text.encode())
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------- commands

def cmd_eval(args):
    from .solutions import Quantity, eval_f

    spec = _load(args)
    x, y, t = _floats(args.point, 3, "--point")
    q = Quantity.parse(args.quantity)
    f, near = eval_f(spec, x, y, t)
    line = format(float(q.apply(f)), ".17g")
    _emit(line + ("  # near singular\n" if near else "\n"), args.out)


def _stem(out, default):
    p = Path(out) if out else Path(default)
    return p.with_suffix("") if p.suffix.lower() in (".csv", ".pgm", ".png") else p, p.suffix.lower()


def cmd_render(args):
    from .io import export_grid, write_bytes
    from .plotting import plot_field
    from .solutions import Quantity, sample_field

    spec = _load(args)
    q = Quantity.parse(args.quantity)
    times = _times(args, spec.grid.t if spec.grid else 0.0)
    stem, ext = _stem(args.out, "field")
    fmt = args.format or (ext[1:] if ext in (".csv", ".pgm") else "both")
    fmts = ["csv", "pgm"] if fmt == "both" else [fmt]
    for k, t in enumerate(times):
        fld = sample_field(spec, _grid_for(args, spec, t), q, workers=args.workers)
        base = stem if len(times) == 1 else stem.with_name(f"{stem.name}_{k:03d}")
        for f in fmts:
            path = write_bytes(base.with_suffix("." + f), export_grid(fld, f))
            print(path)
        if not args.no_figure:
            print(plot_field(fld, base.with_suffix(".png")))


def cmd_residual(args):
    from .verification import kp_residual, physical_kp_residual

    spec = _load(args)
    t = _times(args, spec.grid.t if spec.grid else 0.0)[0]
    grid = _grid_for(args, spec, t)
    if args.physical:
        rep = physical_kp_residual(spec, _context(args, spec), grid, args.fd_step)
    else:
        rep = kp_residual(spec, grid, args.fd_step)
    _emit(rep.to_json(), args.out)


def cmd_velocity(args):
    from .kinematics import harmonic_line_report, spec_velocity
    from .model import BreatherParams, Family

    spec = _load(args)
    out = spec_velocity(spec).to_dict()
    prm = spec.params
    if isinstance(prm, BreatherParams) and prm.family is Family.HARMONIC:
        out["singular_line"] = harmonic_line_report(prm, spec.alpha).splitlines()
    _emit(json.dumps(out, indent=2) + "\n", args.out)


def cmd_dispersion(args):
    from .linear import dispersion_exact, dispersion_kp
    from .plotting import plot_dispersion

    spec = _load(args, required=False)
    ctx = _context(args, spec)
    ks = np.array(_floats(args.k, what="--k"))
    ex = np.atleast_1d(dispersion_exact(ks, args.l, ctx))
    kp = np.atleast_1d(dispersion_kp(ks, args.l, ctx))
    rows = ["k,l,omega_exact,omega_kp,abs_error"]
    for k, a, b in zip(ks, ex, kp):
        rows.append(",".join(format(float(v), ".17g") for v in (k, args.l, a, b, abs(a - b))))
    _emit("\n".join(rows) + "\n", args.out)
    if args.out:
        print(plot_dispersion(ks, ex, kp, Path(args.out).with_suffix(".png")))


def cmd_otin(args):
    from .otin import (DEFAULT_BACKGROUND_TS, DEFAULT_PEAK_TS, DEFAULT_WINDOW, detect_otin,
                       export_sweep, otin_sweep_config, sweep)
    from .plotting import plot_field, plot_sweep
    from .solutions import Quantity

    spec = _load(args)
    peak = _floats(args.peak_t, what="--peak-t") if args.peak_t else DEFAULT_PEAK_TS
    back = _floats(args.background_t, what="--background-t") if args.background_t else DEFAULT_BACKGROUND_TS
    grid = _grid(args.grid) if args.grid else (spec.grid or DEFAULT_WINDOW)
    cfg = otin_sweep_config(spec, grid, peak, back, Quantity.parse(args.quantity), args.workers)
    frames = sweep(cfg)
    event = detect_otin(frames, back, peak)
    summary = event.to_dict()
    summary["otin"] = bool(event.ratio >= 3.0)
    if args.out:
        for p in export_sweep(frames, args.out, event, args.format):
            print(p, file=sys.stderr)
        plot_sweep(frames, Path(args.out) / "maxima.png", event)
        peak = next(fr for fr in frames if fr.t == event.t_peak)
        plot_field(peak.field, Path(args.out) / "peak.png", title=f"peak frame t = {peak.t:g}")
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")


def cmd_curve(args):
    from .plotting import plot_curve
    from .verification import extract_singular_curve

    spec = _load(args)
    t = _times(args, spec.grid.t if spec.grid else 0.0)[0]
    grid = _grid_for(args, spec, t)
    curve = extract_singular_curve(spec, grid)
    rows = ["segment,x,y"]
    for k, seg in enumerate(curve.segments):
        rows += [f"{k},{format(float(x), '.17g')},{format(float(y), '.17g')}" for x, y in seg]
    _emit("\n".join(rows) + "\n", args.out)
    if args.out and not args.no_figure:
        print(plot_curve(curve, grid, Path(args.out).with_suffix(".png")))


def cmd_scale(args):
    from .kinematics import scale_spec

    spec = _load(args)
    if not args.delta > 0:
        raise UsageError("--delta must be positive")
    _emit(save_spec(scale_spec(spec, args.delta)), args.out)


def cmd_to_physical(args):
    from .kinematics import FrameMap, to_physical
    from .solutions import eval_f

    spec = _load(args, required=args.f is None)
    x, y, t = _floats(args.point, 3, "--point")
    ctx = _context(args, spec)
    f = args.f if args.f is not None else float(eval_f(spec, x, y, t)[0])
    xp, yp, tp, eta0, height = to_physical((x, y, t), f, FrameMap(ctx))
    out = {"x_prime": float(xp), "y_prime": float(yp), "t_prime": float(tp),
           "eta0": float(eta0), "surface_height_m": float(height), "f": f}
    _emit(json.dumps(out, indent=2) + "\n", args.out)


COMMANDS = {
    "eval": cmd_eval, "render": cmd_render, "residual": cmd_residual,
    "velocity": cmd_velocity, "dispersion": cmd_dispersion, "otin-scan": cmd_otin,
    "singular-curve": cmd_curve, "scale": cmd_scale, "to-physical": cmd_to_physical,
}


_VALUE_FLAGS = ("--grid", "--point", "--t", "--k", "--peak-t", "--background-t")


def _join_negative(argv):
    """Glue ``--grid -5,5,...`` into ``--grid=-5,5,...`` so argparse accepts it."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1][:2] not in ("--", "-h"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        argv = _join_negative(list(sys.argv[1:] if argv is None else argv))
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_usage(sys.stderr)
            return EXIT_INVALID
        COMMANDS[args.command](args)
    except (UsageError, SpecParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        # quantity parsing and parameter checks surface as ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
