import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import FIG1, FIG17, random_breather, single_spec, super_spec, wall_spec, walls_spec
from kpwaves.model import (
    AlphaSign, SolitonWallParams, WallSuperpositionParams,
)
from kpwaves.tau import (
    MatrixTau, SingularPairError, evaluate_tau, log_det_derivatives, lu_factor, lu_solve,
    tau_breather, tau_matrix, tau_wall,
)

PTS = [(0.3, -0.7, 0.11), (1.3, 0.4, -0.2), (-2.1, 1.7, 0.05)]


def fd4(fn, x, h):
    """Fourth-order central first and second derivatives."""
    v = [fn(x + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
    d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
    return d1, d2


# ------------------------------------------------------------------ walls

def test_wall_without_exponential():
    ev = tau_wall(SolitonWallParams(0.5, 0.5, 0.0), AlphaSign(1), 0.3, 0.2, 0.1)
    assert (ev.tau, ev.d_tau_dx, ev.d2_tau_dx2) == (1.0, 0.0, 0.0)


def test_wall_at_origin():
    ev = tau_wall(SolitonWallParams(0.5, 0.5, 1.0), AlphaSign(1), 0.0, 0.0, 0.0)
    assert (ev.tau, ev.d_tau_dx, ev.d2_tau_dx2) == pytest.approx((2.0, 1.0, 1.0), rel=1e-15)
    assert not ev.near_singular


def test_wall_derivatives_against_fd():
    prm = SolitonWallParams(0.6, 0.4, 1.0)
    ev = tau_wall(prm, AlphaSign(1), 1.0, 1.0, 0.0)
    tau = lambda x: mp.re(oracles.tau_walls(1, [(0.6, 0.4, 1.0)], x, 1, 0))
    with mp.workdps(40):
        d1, d2 = fd4(tau, mp.mpf(1), mp.mpf("1e-5"))
        assert float(tau(mp.mpf(1))) == pytest.approx(ev.tau, rel=1e-14)
    assert ev.d_tau_dx == pytest.approx(float(d1), rel=1e-8)
    assert ev.d2_tau_dx2 == pytest.approx(float(d2), rel=1e-8)


def test_wall_overflow_is_factored():
    ev = tau_wall(SolitonWallParams(0.5, 0.5, 1.0), AlphaSign(1), 900.0, 0.0, 0.0)
    assert ev.saturated and not ev.near_singular
    assert np.isfinite(ev.tau) and ev.log_scale == pytest.approx(900.0)
    # f = (1/2) sech^2(450) underflows to 0 but must not be nan
    assert ev.f() == pytest.approx(0.0, abs=1e-300)


# -------------------------------------------------------------- breathers

def test_harmonic_origin_is_singular():
    spec = single_spec("harmonic", 1, FIG1)
    ev = tau_breather(spec.params, AlphaSign(1), 0.0, 0.0, 0.0)
    assert ev.tau == 0.0 and ev.near_singular


SCALAR_CASES = [(fam, a2, shift) for fam in ("harmonic", "hyperbolic") for a2 in (1, -1)
                for shift in (False, True)] + [("cosh", 1, False), ("cosh", 1, True)]


@pytest.mark.parametrize("fam, a2, shift", SCALAR_CASES)
def test_single_breather_matches_mpmath(fam, a2, shift):
    rng = np.random.default_rng(7)
    for _ in range(3):
        b = random_breather(rng, fam, a2) | {"shift": shift}
        spec = single_spec(fam, a2, b)
        for x, y, t in PTS:
            ref = oracles.tau_single(fam, a2, b, mp.mpf(x), mp.mpf(y), mp.mpf(t))
            ev = evaluate_tau(spec, x, y, t)
            assert ev.tau == pytest.approx(float(mp.re(ref)), rel=1e-12, abs=1e-12)
            fref = oracles.f_of(lambda X, Y, T: oracles.tau_single(fam, a2, b, X, Y, T), x, y, t)
            assert ev.f() == pytest.approx(float(fref), rel=1e-9, abs=1e-11)


def test_hyperbolic_far_field_is_finite_and_accurate():
    b = {"lam": 0.8, "mu": 0.1, "chi": 0.3}
    spec = single_spec("hyperbolic", 1, b)
    for x in (400.0, 460.0, -470.0):
        ev = evaluate_tau(spec, x, 0.5, 0.0)
        assert np.isfinite(ev.tau) and np.isfinite(ev.f())
        # the answer is ~e^{-2|Gamma|}, so the oracle needs several hundred digits
        with mp.workdps(700):
            fref = oracles.f_of(lambda X, Y, T: oracles.tau_single("hyperbolic", 1, b, X, Y, T),
                                x, 0.5, 0)
        assert ev.f() == pytest.approx(float(fref), rel=1e-8, abs=1e-300)


# ------------------------------------------------------------ determinants

def test_wall_matrix_entries():
    prm = WallSuperpositionParams((SolitonWallParams(1.0, 1.0, 1.0), SolitonWallParams(1.5, 1.5, 1.0)))
    mt = tau_matrix(prm, 0.0, 0.0, 0.0, alpha=AlphaSign(1))
    # both off-diagonals are 1/(1 + 1.5); p = q makes the matrix symmetric
    np.testing.assert_allclose(mt.K, [[1.5, 0.4], [0.4, 4.0 / 3.0]], rtol=1e-15)
    ref = oracles.tau_walls(1, [(1.0, 1.0, 1.0), (1.5, 1.5, 1.0)], 0, 0, 0)
    assert np.linalg.det(mt.K) == pytest.approx(float(ref), rel=1e-15)


def test_identity_matrix():
    eye = np.eye(3)
    ev = log_det_derivatives(MatrixTau(eye, np.zeros((3, 3)), np.zeros((3, 3))))
    assert (ev.tau, ev.d_tau_dx, ev.d2_tau_dx2) == (1.0, 0.0, 0.0)


def test_trig_matrix_against_fd():
    rng = np.random.default_rng(3)
    A, W, P = rng.normal(size=(3, 3)), rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    A += 4 * np.eye(3)

    def K(x, deriv=0):
        ph = W * x + P
        return [A + np.sin(ph), W * np.cos(ph), -W * W * np.sin(ph)][deriv]

    x0 = 0.37
    ev = log_det_derivatives(MatrixTau(K(x0), K(x0, 1), K(x0, 2)))
    logdet = lambda x: np.log(abs(np.linalg.det(K(x))))
    d1, d2 = fd4(logdet, x0, 1e-3)
    l1, l2 = ev.log_derivatives()
    assert ev.tau == pytest.approx(np.linalg.det(K(x0)), rel=1e-13)
    assert l1 == pytest.approx(d1, rel=1e-7)
    assert l2 == pytest.approx(d2, rel=1e-7)


def test_fig17_determinant_derivatives_against_fd():
    spec = super_spec("hyperbolic", 1, FIG17)
    ev = evaluate_tau(spec, 0.0, 0.0, 0.0)
    ref = lambda x: oracles.tau_det("hyperbolic", 1, FIG17, x, 0, 0)
    with mp.workdps(40):
        lt = lambda x: mp.log(abs(mp.re(ref(x))))
        d1, d2 = fd4(lt, mp.mpf(0), mp.mpf("1e-5"))
    l1, l2 = ev.log_derivatives()
    assert l1 == pytest.approx(float(d1), rel=1e-8)
    assert l2 == pytest.approx(float(d2), rel=1e-8)


DET_CASES = [(fam, a2, n, gram) for fam in ("harmonic", "hyperbolic") for a2 in (1, -1)
             for n in (2, 3) for gram in (True, False)]


@pytest.mark.parametrize("fam, a2, n, gram", DET_CASES)
def test_superposition_matches_mpmath(fam, a2, n, gram):
    rng = np.random.default_rng(11 + n)
    bs = [random_breather(rng, fam, a2) for _ in range(n)]
    spec = super_spec(fam, a2, bs, gram)
    for x, y, t in PTS[:2]:
        fref = oracles.f_of(lambda X, Y, T: oracles.tau_det(fam, a2, bs, X, Y, T, gram), x, y, t)
        f = evaluate_tau(spec, x, y, t).f()
        assert f == pytest.approx(float(fref), rel=1e-9, abs=1e-10)


@pytest.mark.parametrize("a2", [1, -1])
def test_hyperbolic_superposition_half_pi_shift(a2):
    bs = [{"lam": 0.7, "mu": 0.3, "chi": 0.4, "gamma": 0.2, "shift": True},
          {"lam": 1.1, "mu": -0.4, "chi": -0.5, "gamma": 0.3, "shift": True}]
    spec = super_spec("hyperbolic", a2, bs)
    for x, y, t in PTS:
        fref = oracles.f_of(lambda X, Y, T: oracles.tau_det("hyperbolic", a2, bs, X, Y, T), x, y, t)
        assert evaluate_tau(spec, x, y, t).f() == pytest.approx(float(fref), rel=1e-9)


@pytest.mark.parametrize("a2", [1, -1])
def test_wall_superposition_matches_mpmath(a2):
    walls = [(0.6, 0.4, 1.0), (1.0, -0.3, 0.7), (0.8, 0.5, 2.0)]
    spec = walls_spec(walls, a2)
    for x, y, t in PTS:
        fref = oracles.f_of(lambda X, Y, T: oracles.tau_walls(a2, walls, X, Y, T), x, y, t)
        assert evaluate_tau(spec, x, y, t).f() == pytest.approx(float(fref), rel=1e-10)


def test_wall_superposition_overflow():
    walls = [(0.6, 0.4, 1.0), (1.0, -0.3, 0.7)]
    spec = walls_spec(walls)
    ev = evaluate_tau(spec, 800.0, 0.0, 0.0)
    assert np.isfinite(ev.f()) and np.asarray(ev.log_scale) > 0


def test_singular_pair_named():
    prm = WallSuperpositionParams((SolitonWallParams(1.0, 0.5, 1.0), SolitonWallParams(0.3, -1.0, 1.0)))
    with pytest.raises(SingularPairError, match=r"\(1, 0\)|\(0, 1\)"):
        tau_matrix(prm, 0.0, 0.0, 0.0, alpha=AlphaSign(1))


def test_near_singular_matrix_flagged():
    K = np.array([[1.0, 2.0], [2.0, 4.0]])
    ev = log_det_derivatives(MatrixTau(K, np.eye(2), np.eye(2)))
    assert ev.near_singular


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_lu_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, n, n))
    B = rng.normal(size=(4, n, 2))
    lu, perm, sign = lu_factor(A)
    det = sign * np.prod(np.diagonal(lu, axis1=-2, axis2=-1), axis=-1)
    np.testing.assert_allclose(det, np.linalg.det(A), rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(lu_solve(lu, perm, B), np.linalg.solve(A, B), rtol=1e-7, atol=1e-9)


def test_vectorised_matches_pointwise():
    spec = super_spec("harmonic", -1, FIG17)
    xs = np.linspace(-3, 3, 7)
    ev = evaluate_tau(spec, xs, 0.4, 0.1)
    for k, x in enumerate(xs):
        assert evaluate_tau(spec, x, 0.4, 0.1).f() == pytest.approx(ev.f()[k], rel=1e-13)


def test_wall_invariant_under_single_wall_determinant():
    a = evaluate_tau(wall_spec(0.6, 0.4, 1.3), 0.2, -0.4, 0.3).f()
    b = evaluate_tau(walls_spec([(0.6, 0.4, 1.3)]), 0.2, -0.4, 0.3).f()
    assert a == pytest.approx(b, rel=1e-13)
