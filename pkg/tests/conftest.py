from pathlib import Path

import numpy as np
import pytest

from kpwaves.model import (
    AlphaSign, BreatherParams, BreatherSuperpositionParams, Coupling, Family, GridSpec,
    SolitonWallParams, WallSuperpositionParams, WaveSpec,
)

SPECS = Path(__file__).resolve().parent.parent / "specs"

FAMILIES = {"harmonic": Family.HARMONIC, "hyperbolic": Family.HYPERBOLIC, "cosh": Family.COSH}


def breather(fam, b):
    return BreatherParams(b["lam"], b["mu"], b["chi"], b.get("gamma", 0.0), b.get("rho", 0.0),
                          bool(b.get("shift", False)), FAMILIES[fam])


def single_spec(fam, a2, b, grid=None):
    return WaveSpec(FAMILIES[fam], AlphaSign(a2), breather(fam, b), grid)


def super_spec(fam, a2, bs, gram=True, grid=None):
    prm = BreatherSuperpositionParams(tuple(breather(fam, b) for b in bs), AlphaSign(a2),
                                      Coupling.GRAM if gram else Coupling.PRINTED)
    return WaveSpec(FAMILIES[fam], AlphaSign(a2), prm, grid)


def wall_spec(p, q, c, a2=1, grid=None):
    return WaveSpec(Family.WALL, AlphaSign(a2), SolitonWallParams(p, q, c), grid)


def walls_spec(walls, a2=1, grid=None):
    prm = WallSuperpositionParams(tuple(SolitonWallParams(*w) for w in walls))
    return WaveSpec(Family.WALL, AlphaSign(a2), prm, grid)


FIG1 = {"lam": 0.5, "mu": -0.1, "chi": 0.0}
FIG5 = {"lam": 0.65, "mu": -0.1, "chi": 0.105 * np.pi}
FIG17 = [{"lam": 0.5, "mu": 0.2, "chi": 0.6}, {"lam": 1.0, "mu": 0.5, "chi": -0.7}]
FIG19 = [{"lam": 0.5, "mu": 0.01, "chi": 0.6}, {"lam": 1.0, "mu": 0.5, "chi": -0.7}]
WINDOW17 = GridSpec(-15.0, 15.0, -15.0, 15.0, 300, 300, 0.0)


def random_breather(rng, fam, a2):
    """A random breather away from the zero-lambda and degenerate cases."""
    return {"lam": float(rng.uniform(0.3, 1.0) * rng.choice([-1, 1])),
            "mu": float(rng.uniform(-0.5, 0.5)), "chi": float(rng.uniform(-0.8, 0.8)),
            "gamma": float(rng.uniform(-1, 1)), "rho": float(rng.uniform(-1, 1))}


@pytest.fixture
def specs_dir():
    return SPECS


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[str, str] = {}


def record(criterion: str, ok: bool, detail: str) -> bool:
    line = f"{criterion} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
