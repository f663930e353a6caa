"""Tau functions and their analytic x-derivatives.

Every solution is ``f = 2 d^2/dx^2 ln tau``.  The functions here return
``tau``, ``tau_x`` and ``tau_xx`` evaluated in closed form, vectorised over
broadcastable ``x, y, t`` arrays.

When an exponential argument exceeds :data:`OVERFLOW_ARG` the evaluation
switches to a factored form ``tau = exp(s) * tau_hat`` where ``s`` is linear
in ``x`` at that point.  ``log_scale`` records ``s``; the stored derivatives are
those of ``tau_hat``, which leaves ``d^2/dx^2 ln tau`` unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    AlphaSign, BreatherParams, BreatherSuperpositionParams, Coupling, Family,
    SolitonWallParams, WallSuperpositionParams, WaveSpec,
)

SIGMA_TOL = 1e-8
OVERFLOW_ARG = 700.0
COND_LIMIT = 1e12
# matrix rows are rescaled once |Gamma_n| passes this
_ROW_SHIFT_ARG = 300.0


class SingularPairError(ValueError):
    """A determinant entry has a vanishing denominator."""

    def __init__(self, n: int, k: int, detail: str = ""):
        self.pair = (n, k)
        super().__init__(f"vanishing denominator for pair ({n}, {k}) {detail}".rstrip())


@dataclass(frozen=True)
class TauEvaluation:
    """tau and its first two x-derivatives at one point or over an array.

    ``d2_log`` holds ``d^2/dx^2 ln|tau|`` when it was computed directly (the
    determinant path); otherwise it is derived from the other fields.
    """

    tau: np.ndarray | float
    d_tau_dx: np.ndarray | float
    d2_tau_dx2: np.ndarray | float
    near_singular: np.ndarray | bool
    log_scale: np.ndarray | float = 0.0
    scale: np.ndarray | float = 1.0
    d2_log: np.ndarray | float | None = None

    @property
    def saturated(self):
        return np.asarray(self.log_scale) != 0

    def log_derivatives(self):
        """Return ``(d/dx ln tau, d^2/dx^2 ln tau)``."""
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            d1 = np.divide(self.d_tau_dx, self.tau)
            if self.d2_log is not None:
                return d1, self.d2_log
            return d1, np.divide(self.d2_tau_dx2, self.tau) - d1 * d1

    def f(self):
        """The KP solution value 2 d^2/dx^2 ln tau."""
        return 2.0 * self.log_derivatives()[1]


@dataclass(frozen=True)
class MatrixTau:
    """Determinant matrix with elementwise analytic x-derivatives.

    The trailing two axes are the matrix axes.  ``log_scale`` is the linear
    factor removed by row/column rescaling (``det K = exp(log_scale) det K_hat``)
    and ``scale`` bounds the additive terms of the determinant.
    """

    K: np.ndarray
    dK_dx: np.ndarray
    d2K_dx2: np.ndarray
    log_scale: np.ndarray | float = 0.0
    scale: np.ndarray | float = 1.0


def _finish(u0, u1, u2, s, s_slope, scale, scalar, numer):
    """Turn e^{-s}(tau, tau_x, tau_xx) into derivatives of tau_hat = e^{-s} tau.

    ``numer`` is e^{-2s}(tau tau_xx - tau_x^2) in a cancellation-free form, so
    d^2 ln tau = numer / u0^2 keeps full relative accuracy.
    """
    t0 = u0
    t1 = u1 - s_slope * u0
    t2 = u2 - 2.0 * s_slope * u1 + s_slope * s_slope * u0
    near = np.abs(t0) <= SIGMA_TOL * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        d2 = numer / u0 / u0
    ev = TauEvaluation(t0, t1, t2, near, s, scale, d2)
    return _as_scalar(ev) if scalar else ev


def _as_scalar(ev: TauEvaluation) -> TauEvaluation:
    conv = lambda v: v if v is None else v.item() if np.ndim(v) == 0 and hasattr(v, "item") else v
    return TauEvaluation(*(conv(getattr(ev, k)) for k in
                           ("tau", "d_tau_dx", "d2_tau_dx2", "near_singular",
                            "log_scale", "scale", "d2_log")))


def _is_scalar(*args) -> bool:
    return all(np.ndim(a) == 0 for a in args)


def _real(v):
    """Float array, keeping extended precision when the input has it."""
    a = np.asarray(v)
    return a if a.dtype == np.longdouble else a.astype(float)


def _alpha2_value(alpha) -> float:
    if isinstance(alpha, AlphaSign):
        return float(alpha.alpha_squared)
    return float(alpha)


# ------------------------------------------------------------------ walls

def wall_phase(p, q, alpha2, x, y, t):
    k = p + q
    return k * x + (q * q - p * p) * y - k * (k * k + 3.0 * alpha2 * (p - q) ** 2) * t


def tau_wall(params: SolitonWallParams, alpha, x, y, t) -> TauEvaluation:
    """tau = 1 + c/(p+q) exp(theta) for a single soliton wall."""
    a2 = _alpha2_value(alpha)
    p, q, c = params.p, params.q, params.c
    if p + q == 0:
        raise ZeroDivisionError("p + q = 0")
    scalar = _is_scalar(x, y, t)
    x, y, t = np.broadcast_arrays(*(_real(v) for v in (x, y, t)))
    k = p + q
    amp = c / k
    theta = wall_phase(p, q, a2, x, y, t)
    big = theta > OVERFLOW_ARG
    with np.errstate(over="ignore"):
        e = np.exp(np.where(big, 0.0, theta))
        one = np.where(big, np.exp(-np.where(big, theta, 0.0)), 1.0)
    # e^{-s} (1, a e^theta) with s = theta on saturated points
    term = np.where(big, amp, amp * e)
    u0 = one + term
    u1 = k * term
    u2 = k * k * term
    s = np.where(big, theta, 0.0)
    slope = np.where(big, k, 0.0)
    scale = np.maximum(np.abs(one), np.abs(term))
    return _finish(u0, u1, u2, s, slope, scale, scalar, k * k * one * term)


# --------------------------------------------------------------- breathers

def _alpha_parts(alpha2: float, chi, family: Family):
    """Even/odd combinations of alpha*chi that appear in Upsilon.

    Harmonic: (cos(alpha chi), sin(alpha chi)/alpha); hyperbolic:
    (cosh(alpha chi), sinh(alpha chi)/alpha); cosh family:
    (sinh(alpha chi), cosh(alpha chi)/alpha).  For alpha^2 < 0 the
    trigonometric and hyperbolic roles swap, which keeps everything real.
    """
    a = np.sqrt(abs(alpha2))
    ax = a * chi
    if family is Family.COSH:
        if alpha2 <= 0:
            raise ValueError("Cosh family requires alpha_squared > 0")
        return np.sinh(ax), np.cosh(ax) / a
    oscillating = (family is Family.HARMONIC) == (alpha2 > 0)
    if oscillating:
        return np.cos(ax), np.sin(ax) / a
    return np.cosh(ax), np.sinh(ax) / a


def breather_forms(b: BreatherParams, alpha2: float):
    """Coefficients of the linear forms Upsilon and Gamma.

    Returns ``(ups, gam)`` with each a 4-tuple ``(const, x, y, t)``.
    """
    lam, mu = b.lam, b.mu
    even, odd = _alpha_parts(alpha2, b.chi, b.family)
    if b.family is Family.HARMONIC:
        ups = (b.rho, even, 2.0 * (lam * odd - mu * even),
               12.0 * (lam * lam * even - alpha2 * mu * mu * even + 2.0 * alpha2 * lam * mu * odd))
        gam = (b.gamma, lam, -2.0 * lam * mu, 4.0 * lam * (lam * lam - 3.0 * alpha2 * mu * mu))
    else:
        ups = (b.rho, even, -2.0 * (lam * odd + mu * even),
               -12.0 * (lam * lam * even + alpha2 * mu * mu * even + 2.0 * alpha2 * lam * mu * odd))
        gam = (b.gamma, lam, -2.0 * lam * mu, -4.0 * lam * (lam * lam + 3.0 * alpha2 * mu * mu))
    return ups, gam


def _linear(coef, x, y, t):
    return coef[0] + coef[1] * x + coef[2] * y + coef[3] * t


def tau_breather(params: BreatherParams, alpha, x, y, t) -> TauEvaluation:
    """tau = 2 lam Upsilon - sin 2Gamma (harmonic), - sinh 2Gamma (hyperbolic)
    or + cosh 2Gamma (cosh family); the half-pi flag flips the second term."""
    a2 = _alpha2_value(alpha)
    lam = params.lam
    if lam == 0:
        raise ZeroDivisionError("lambda = 0")
    scalar = _is_scalar(x, y, t)
    x, y, t = np.broadcast_arrays(*(_real(v) for v in (x, y, t)))
    ups_c, gam_c = breather_forms(params, a2)
    ups = _linear(ups_c, x, y, t)
    two_g = 2.0 * _linear(gam_c, x, y, t)
    sign = -1.0 if params.gamma_half_pi_shift else 1.0
    lin = 2.0 * lam * ups
    lin_x = 2.0 * lam * ups_c[1]
    lin_terms = [2.0 * lam * ups_c[0] * np.ones_like(x), 2.0 * lam * ups_c[1] * x,
                 2.0 * lam * ups_c[2] * y, 2.0 * lam * ups_c[3] * t]

    if params.family is Family.HARMONIC:
        sn, cs = np.sin(two_g), np.cos(two_g)
        u0 = lin - sign * sn
        u1 = lin_x - 2.0 * lam * sign * cs
        u2 = 4.0 * lam * lam * sign * sn
        numer = 4.0 * lam * lam * (sign * sn * lin - 1.0) - lin_x ** 2 + 4.0 * lam * sign * lin_x * cs
        s = np.zeros_like(x)
        slope = s
        osc = np.abs(sn)
        damp = 1.0
    else:
        big = np.abs(two_g) > OVERFLOW_ARG
        s = np.where(big, np.abs(two_g), 0.0)
        slope = np.where(big, 2.0 * lam * np.sign(two_g), 0.0)
        damp = np.exp(-s)
        q = np.exp(-2.0 * np.abs(two_g))
        sh = np.where(big, np.sign(two_g) * (1.0 - q) / 2.0, np.sinh(np.where(big, 0.0, two_g)))
        ch = np.where(big, (1.0 + q) / 2.0, np.cosh(np.where(big, 0.0, two_g)))
        if params.family is Family.HYPERBOLIC:
            # second term -sign*sinh(2G)
            u0 = lin * damp - sign * sh
            u1 = lin_x * damp - 2.0 * lam * sign * ch
            u2 = -4.0 * lam * lam * sign * sh
            numer = (-4.0 * lam * lam * (sign * sh * lin * damp + damp * damp)
                     - (lin_x * damp) ** 2 + 4.0 * lam * sign * lin_x * damp * ch)
            osc = np.abs(sh)
        else:
            u0 = lin * damp + sign * ch
            u1 = lin_x * damp + 2.0 * lam * sign * sh
            u2 = 4.0 * lam * lam * sign * ch
            numer = (4.0 * lam * lam * (sign * ch * lin * damp + damp * damp)
                     - (lin_x * damp) ** 2 - 4.0 * lam * sign * lin_x * damp * sh)
            osc = np.abs(ch)
    scale = osc
    for term in lin_terms:
        scale = np.maximum(scale, np.abs(term) * damp)
    return _finish(u0, u1, u2, s, slope, scale, scalar, numer)


# ------------------------------------------------------------ determinants

def _exp_pair(phase, slope, shift, shift_slope, sgn):
    """(e^{P-R} + sgn e^{-P-R})/2 and two x-derivatives, P and R linear."""
    a = np.exp(phase - shift)
    b = np.exp(-phase - shift)
    da = slope - shift_slope
    db = -slope - shift_slope
    return ((a + sgn * b) / 2.0, (da * a + sgn * db * b) / 2.0,
            (da * da * a + sgn * db * db * b) / 2.0)


def _trig(phase, slope, kind):
    if kind == "sin":
        return np.sin(phase), slope * np.cos(phase), -slope * slope * np.sin(phase)
    return np.cos(phase), -slope * np.sin(phase), -slope * slope * np.cos(phase)


def _wall_matrix(params: WallSuperpositionParams, a2: float, x, y, t) -> MatrixTau:
    walls = params.walls
    n_w = len(walls)
    shape = np.broadcast(x, y, t).shape
    K = np.zeros(shape + (n_w, n_w), dtype=np.result_type(x, y, t))
    Kx = np.zeros_like(K)
    Kxx = np.zeros_like(K)
    S = np.zeros_like(K)
    log_scale = np.zeros(shape)
    for n, wn in enumerate(walls):
        kn = wn.p + wn.q
        theta = wall_phase(wn.p, wn.q, a2, x, y, t)
        big = theta > OVERFLOW_ARG
        s = np.where(big, theta, 0.0)
        ds = np.where(big, kn, 0.0)
        log_scale = log_scale + s
        e = np.exp(theta - s)
        diag = np.exp(-s)
        for m, wm in enumerate(walls):
            den = wn.p + wm.q
            if den == 0:
                raise SingularPairError(m, n, "(p_n + q_m = 0)")
            term = wn.c * e / den
            val = term.copy()
            d1 = (kn - ds) * term
            d2 = (kn - ds) ** 2 * term
            S[..., m, n] = np.abs(term)
            if m == n:
                val = val + diag
                d1 = d1 - ds * diag
                d2 = d2 + ds * ds * diag
                S[..., m, n] = np.maximum(S[..., m, n], diag)
            K[..., m, n] = val
            Kx[..., m, n] = d1
            Kxx[..., m, n] = d2
    return MatrixTau(K, Kx, Kxx, log_scale, _hadamard(S))


def _hadamard(S):
    """Product of row norms, a bound on |det| (rows rescaled to avoid overflow)."""
    top = np.max(S, axis=-1)
    safe = np.where(top > 0, top, 1.0)
    with np.errstate(over="ignore"):
        return np.prod(top * np.sqrt(np.sum((S / safe[..., None]) ** 2, axis=-1)), axis=-1)


def _breather_matrix(params: BreatherSuperpositionParams, x, y, t, alpha2=None) -> MatrixTau:
    bs = params.breathers
    N = len(bs)
    a2 = float(params.alpha.alpha_squared if alpha2 is None else alpha2)
    family = bs[0].family
    if family is Family.COSH and N > 1:
        raise ValueError("no determinant formula for the Cosh family")
    harmonic = family is Family.HARMONIC
    alpha = np.sqrt(a2) if a2 > 0 else 1j * np.sqrt(-a2)
    need_complex = a2 < 0 and N > 1
    dtype = np.result_type(x, y, t, complex if need_complex else float)
    shape = np.broadcast(x, y, t).shape

    forms = [breather_forms(b, a2) for b in bs]
    ups = [_linear(u, x, y, t) for u, _ in forms]
    gam = [_linear(g, x, y, t) for _, g in forms]
    # hyperbolic entries: row/column n rescaled by exp(-r_n) with r_n linear
    r, dr = [], []
    for n, b in enumerate(bs):
        if harmonic:
            r.append(np.zeros(shape))
            dr.append(np.zeros(shape))
        else:
            g = gam[n]
            big = np.abs(g) > _ROW_SHIFT_ARG
            r.append(np.where(big, np.abs(g) - _ROW_SHIFT_ARG, 0.0))
            dr.append(np.where(big, b.lam * np.sign(g), 0.0))
    log_scale = 2.0 * sum(r)

    # half-pi shift (uniform) negates every Gamma_n + Gamma_k term
    sgn_sum = -1.0 if bs[0].gamma_half_pi_shift else 1.0
    if harmonic:
        # harmonic shift is a real gamma offset and may vary per breather
        gam = [g + (np.pi / 2 if b.gamma_half_pi_shift else 0.0) for g, b in zip(gam, bs)]
        sgn_sum = 1.0

    K = np.zeros(shape + (N, N), dtype=dtype)
    Kx = np.zeros_like(K)
    Kxx = np.zeros_like(K)
    S = np.zeros(shape + (N, N))
    for n, bn in enumerate(bs):
        ln = bn.lam
        # diagonal: Upsilon_n - osc(2 Gamma_n) / (2 lam_n)
        u_c = forms[n][0]
        R, dR = 2.0 * r[n], 2.0 * dr[n]
        e = np.exp(-R)
        lv, l1, l2 = ups[n] * e, (u_c[1] - dR * ups[n]) * e, (dR * dR * ups[n] - 2.0 * dR * u_c[1]) * e
        if harmonic:
            o0, o1, o2 = _trig(2.0 * gam[n], 2.0 * ln, "sin")
        else:
            o0, o1, o2 = _exp_pair(2.0 * gam[n], 2.0 * ln, R, dR, -1.0)
            o0, o1, o2 = sgn_sum * o0, sgn_sum * o1, sgn_sum * o2
        K[..., n, n] = lv - o0 / (2.0 * ln)
        Kx[..., n, n] = l1 - o1 / (2.0 * ln)
        Kxx[..., n, n] = l2 - o2 / (2.0 * ln)
        S[..., n, n] = np.maximum.reduce([
            np.abs(u_c[0] * e), np.abs(u_c[1] * x * e), np.abs(u_c[2] * y * e),
            np.abs(u_c[3] * t * e), np.abs(o0) / abs(2.0 * ln)])

        for k, bk in enumerate(bs):
            if k == n:
                continue
            lk = bk.lam
            dmu = bn.mu - bk.mu
            dl, sl = ln - lk, ln + lk
            if harmonic:
                d_minus = a2 * dmu * dmu + dl * dl
                d_plus = a2 * dmu * dmu + sl * sl
            else:
                d_minus = a2 * dmu * dmu - dl * dl
                d_plus = a2 * dmu * dmu - sl * sl
            ref = abs(a2 * dmu * dmu) + sl * sl
            for den, label in ((d_minus, "-"), (d_plus, "+")):
                if abs(den) <= 1e-12 * ref:
                    raise SingularPairError(n, k, f"(lambda_n {label} lambda_k)")
            if params.coupling is Coupling.GRAM:
                c_minus = alpha * (bn.chi + bk.chi) / 2.0
                c_plus = alpha * (bn.chi - bk.chi) / 2.0
            else:
                c_minus = c_plus = 0.0
            ph_minus = gam[n] - gam[k] - c_minus
            ph_plus = gam[n] + gam[k] - c_plus
            sl_minus, sl_plus = ln - lk, ln + lk
            if harmonic:
                sm = _trig(ph_minus, sl_minus, "sin")
                sp = _trig(ph_plus, sl_plus, "sin")
                cp = _trig(ph_plus, sl_plus, "cos")
                cm = _trig(ph_minus, sl_minus, "cos")
                coef = (dl / d_minus, -sl / d_plus, alpha * dmu / d_plus, -alpha * dmu / d_minus)
            else:
                R = r[n] + r[k]
                dR = dr[n] + dr[k]
                sm = _exp_pair(ph_minus, sl_minus, R, dR, -1.0)
                sp = _exp_pair(ph_plus, sl_plus, R, dR, -1.0)
                cp = _exp_pair(ph_plus, sl_plus, R, dR, 1.0)
                cm = _exp_pair(ph_minus, sl_minus, R, dR, 1.0)
                coef = (-dl / d_minus, sl / d_plus, alpha * dmu / d_plus, -alpha * dmu / d_minus)
            coef = (coef[0], sgn_sum * coef[1], sgn_sum * coef[2], coef[3])
            pieces = (sm, sp, cp, cm)
            for j in range(3):
                val = sum(c * pc[j] for c, pc in zip(coef, pieces))
                (K, Kx, Kxx)[j][..., n, k] = val
            S[..., n, k] = np.maximum.reduce([np.abs(c * pc[0]) for c, pc in zip(coef, pieces)])
    return MatrixTau(K, Kx, Kxx, log_scale, _hadamard(S))


def tau_matrix(params, x, y, t, alpha=None) -> MatrixTau:
    """Assemble the determinant matrix of a wall or breather superposition.

    ``alpha`` is required for walls; breathers carry their own unless it is
    overridden here.
    """
    x, y, t = (_real(v) for v in (x, y, t))
    if isinstance(params, WallSuperpositionParams):
        if alpha is None:
            raise ValueError("alpha is required for wall superpositions")
        return _wall_matrix(params, _alpha2_value(alpha), x, y, t)
    if isinstance(params, BreatherSuperpositionParams):
        a2 = None if alpha is None else _alpha2_value(alpha)
        return _breather_matrix(params, x, y, t, a2)
    raise TypeError(f"not a superposition: {type(params).__name__}")


# ------------------------------------------------------------ LU and traces

def lu_factor(a):
    """Batched LU with partial pivoting over the trailing two axes.

    Returns ``(lu, perm, sign)``: unit-lower and upper factors packed in one
    array, the row permutation, and the permutation parity.
    """
    lu = np.array(a, copy=True)
    n = lu.shape[-1]
    batch = lu.shape[:-2]
    perm = np.broadcast_to(np.arange(n), batch + (n,)).copy()
    sign = np.ones(batch)
    for k in range(n):
        p = k + np.argmax(np.abs(lu[..., k:, k]), axis=-1)
        swap = p != k
        if np.any(swap):
            pk = np.broadcast_to(p[..., None, None], batch + (1, n))
            row_p = np.take_along_axis(lu, pk, axis=-2).copy()
            row_k = lu[..., k:k + 1, :].copy()
            np.put_along_axis(lu, pk, row_k, axis=-2)
            lu[..., k:k + 1, :] = row_p
            pp = p[..., None]
            perm_p = np.take_along_axis(perm, pp, axis=-1).copy()
            perm_k = perm[..., k:k + 1].copy()
            np.put_along_axis(perm, pp, perm_k, axis=-1)
            perm[..., k:k + 1] = perm_p
            sign = np.where(swap, -sign, sign)
        piv = lu[..., k, k]
        safe = np.where(piv == 0, 1.0, piv)
        lu[..., k + 1:, k] = lu[..., k + 1:, k] / safe[..., None]
        lu[..., k + 1:, k + 1:] -= lu[..., k + 1:, k, None] * lu[..., k, None, k + 1:]
    return lu, perm, sign


def lu_solve(lu, perm, b):
    """Solve ``A X = B`` from :func:`lu_factor` output (B has matrix shape)."""
    n = lu.shape[-1]
    pb = np.broadcast_to(perm[..., None], perm.shape + (b.shape[-1],))
    x = np.take_along_axis(np.broadcast_to(b, lu.shape[:-1] + (b.shape[-1],)), pb, axis=-2)
    x = x.astype(np.result_type(lu, b), copy=True)
    for i in range(n):
        if i:
            x[..., i, :] -= np.einsum("...j,...jk->...k", lu[..., i, :i], x[..., :i, :])
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            x[..., i, :] -= np.einsum("...j,...jk->...k", lu[..., i, i + 1:], x[..., i + 1:, :])
        x[..., i, :] /= lu[..., i, i, None]
    return x


def log_det_derivatives(mt: MatrixTau) -> TauEvaluation:
    """det K with d/dx and d^2/dx^2 of ln det K via the trace formula.

    d ln det K = tr(K^-1 K_x);  d^2 ln det K = tr(K^-1 K_xx) - tr((K^-1 K_x)^2).
    One LU factorisation serves the solves for K_x, K_xx and the inverse used
    by the condition estimate.
    """
    K, Kx, Kxx = mt.K, mt.dK_dx, mt.d2K_dx2
    n = K.shape[-1]
    lu, perm, sign = lu_factor(K)
    diag = np.diagonal(lu, axis1=-2, axis2=-1)
    det = sign * np.prod(diag, axis=-1)
    singular = np.any(diag == 0, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rhs = np.concatenate([Kx, Kxx, np.broadcast_to(np.eye(n), K.shape)], axis=-1)
        sol = lu_solve(lu, perm, rhs)
        A = sol[..., :n]
        B = sol[..., n:2 * n]
        inv = sol[..., 2 * n:]
        d1 = np.trace(A, axis1=-2, axis2=-1)
        d2 = np.trace(B, axis1=-2, axis2=-1) - np.einsum("...ij,...ji->...", A, A)
        cond = (np.max(np.sum(np.abs(K), axis=-2), axis=-1)
                * np.max(np.sum(np.abs(inv), axis=-2), axis=-1))
    if np.iscomplexobj(det):
        det, d1, d2 = det.real, d1.real, d2.real
    near = (singular | ~np.isfinite(cond) | (cond > COND_LIMIT)
            | (np.abs(det) <= SIGMA_TOL * mt.scale))
    with np.errstate(invalid="ignore", over="ignore"):
        ev = TauEvaluation(det, det * d1, det * (d2 + d1 * d1), near, mt.log_scale, mt.scale, d2)
    return _as_scalar(ev) if np.ndim(det) == 0 else ev


# ------------------------------------------------------------- dispatcher

def evaluate_tau(spec: WaveSpec, x, y, t, alpha2: float | None = None) -> TauEvaluation:
    """Tau evaluation for any spec; ``alpha2`` overrides the spec's sign."""
    a2 = float(spec.alpha.alpha_squared if alpha2 is None else alpha2)
    prm = spec.params
    if isinstance(prm, SolitonWallParams):
        return tau_wall(prm, a2, x, y, t)
    if isinstance(prm, BreatherParams):
        return tau_breather(prm, a2, x, y, t)
    if isinstance(prm, BreatherSuperpositionParams) and len(prm) == 1 and prm.family is Family.COSH:
        return tau_breather(prm.breathers[0], a2, x, y, t)
    scalar = _is_scalar(x, y, t)
    ev = log_det_derivatives(tau_matrix(prm, x, y, t, alpha=a2 if alpha2 is not None or
                                        isinstance(prm, WallSuperpositionParams) else None))
    return _as_scalar(ev) if scalar else ev
