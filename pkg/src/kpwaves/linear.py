"""Linear water-wave theory: dispersion relations and the velocity potential of one mode.

A mode has elevation ``eta = cos(k x' + l y' - omega t')``.  Its potential is
``phi = A(z') sin(k x' + l y' - omega t')``, the real part of the complex form
with coefficients ``-i C1`` and ``-i C2``; this module only stores the real
magnitudes ``C1`` and ``C2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import PhysicalContext

ASYMPTOTIC_DEPTH = 700.0


def _kappa(k, l):
    return np.hypot(k, l)


def dispersion_exact(k, l, ctx: PhysicalContext):
    """Positive root of omega^2 = kappa (g + s kappa^2 / rho) tanh(h kappa)."""
    kap = _kappa(np.asarray(k, dtype=float), np.asarray(l, dtype=float))
    w2 = kap * (ctx.g + ctx.s_tension / ctx.rho_density * kap ** 2) * np.tanh(ctx.h * kap)
    out = np.sqrt(w2)
    return out.item() if out.ndim == 0 else out


def dispersion_kp(k, l, ctx: PhysicalContext):
    """Weakly dispersive, weakly two-dimensional approximation of the exact relation.

    The cubic correction carries the factor -(h^2/6)(1 - 3 s / (g rho h^2)),
    the sign that matches the Taylor expansion of :func:`dispersion_exact`.
    """
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    if np.any(k == 0):
        raise ZeroDivisionError("k = 0")
    g, h = ctx.g, ctx.h
    bond = 1.0 - 3.0 * ctx.s_tension / (g * ctx.rho_density * h * h)
    out = math.sqrt(g * h) * (k + l * l / (2.0 * k) - h * h / 6.0 * bond * k ** 3)
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class LinearMode:
    """One linear mode with its integration constants."""

    k: float
    l: float
    omega: float
    C1: float
    C2: float
    h: float

    @property
    def kappa(self) -> float:
        return math.hypot(self.k, self.l)

    def phase(self, x, y, t):
        return self.k * np.asarray(x) + self.l * np.asarray(y) - self.omega * np.asarray(t)

    def elevation(self, x, y, t):
        return np.cos(self.phase(x, y, t))

    def amplitude(self, z):
        """C1 e^{kappa z} + C2 e^{-kappa z}; C2 e^{-kappa z} is formed without overflow."""
        kap, z = self.kappa, np.asarray(z, dtype=float)
        return self.C1 * (np.exp(kap * z) + np.exp(-kap * (z + 2.0 * self.h)))

    def amplitude_cosh(self, z):
        """(omega/kappa) cosh((z+h) kappa) / sinh(h kappa), asymptotic for deep layers."""
        kap, z = self.kappa, np.asarray(z, dtype=float)
        if self.h * kap > ASYMPTOTIC_DEPTH:
            return self.omega / kap * np.exp(kap * z)
        return self.omega / kap * np.cosh((z + self.h) * kap) / np.sinh(self.h * kap)

    def d_amplitude_dz(self, z):
        kap, z = self.kappa, np.asarray(z, dtype=float)
        return self.C1 * kap * (np.exp(kap * z) - np.exp(-kap * (z + 2.0 * self.h)))

    def potential(self, x, y, z, t, form: str = "sum"):
        amp = self.amplitude(z) if form == "sum" else self.amplitude_cosh(z)
        return amp * np.sin(self.phase(x, y, t))

    def dphi_dz(self, x, y, z, t):
        return self.d_amplitude_dz(z) * np.sin(self.phase(x, y, t))


def linear_potential(k: float, l: float, ctx: PhysicalContext) -> LinearMode:
    """Build the mode for wave numbers (k, l) with omega from the exact relation."""
    kap = math.hypot(k, l)
    if kap == 0:
        raise ValueError("kappa must be positive")
    omega = dispersion_exact(k, l, ctx)
    damp = math.exp(-2.0 * ctx.h * kap)
    C1 = omega / (kap * -math.expm1(-2.0 * ctx.h * kap))
    return LinearMode(float(k), float(l), float(omega), C1, C1 * damp, ctx.h)
