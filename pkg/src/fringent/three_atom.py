"""Three atoms on an equilateral triangle in a W-like state.

Torus angles (theta1, theta2, theta3) follow the slot order of the canonical
state: theta_j is the phase k.(x_k - x_l) across the pair that does *not*
carry c_j, with (j, k, l) cyclic, so theta1 + theta2 + theta3 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .errors import DomainError, InternalConsistencyError
from .states import WLikeState, wrap_phase
from .two_atom import coupling_fg

VARTHETA = 2 * np.pi * np.arange(3) / 3


@dataclass(frozen=True)
class TriangleGeometry:
    """Equilateral triangle with side u = k0 r (positions in units of 1/k0)."""

    u: float

    def __post_init__(self):
        if not (float(self.u) > 0 and math.isfinite(self.u)):
            raise DomainError(f"side u must be positive and finite, got {self.u}")

    @property
    def positions(self):
        return self.u / math.sqrt(3) * np.stack(
            [np.sin(VARTHETA), -np.cos(VARTHETA), np.zeros(3)], axis=1)

    @property
    def edges(self):
        return self.u * np.stack([np.cos(VARTHETA), np.sin(VARTHETA), np.zeros(3)], axis=1)

    def phases(self, khat):
        """Physical (theta1, theta2, theta3) for unit direction(s) ``khat``.

        theta_i = khat . (x_j - x_k) with (i, j, k) cyclic over physical atoms.
        """
        khat = np.asarray(khat, dtype=float)
        return np.moveaxis(khat @ self.edges.T, -1, 0)

    def atom_phases(self, khat):
        """khat . x_j for each physical atom, leading axis of length 3."""
        return np.moveaxis(np.asarray(khat, dtype=float) @ self.positions.T, -1, 0)


@dataclass(frozen=True)
class TriadCoupling:
    u: float
    f: float
    g: float
    omega_plus: float
    omega_minus: float
    gamma_plus: float
    gamma_minus: float
    h_plus: float
    h_minus: float
    h_zero: float

    def lorentzians(self, omega):
        omega = np.asarray(omega, dtype=float)
        lp = 1.0 / ((omega - self.omega_plus) ** 2 + 0.25 * self.gamma_plus**2)
        lm = 1.0 / ((omega - self.omega_minus) ** 2 + 0.25 * self.gamma_minus**2)
        return lp, lm

    @property
    def poles(self):
        return (complex(self.omega_plus, -0.5 * self.gamma_plus),
                complex(self.omega_minus, -0.5 * self.gamma_minus))


def eigenmodes_three(u) -> TriadCoupling:
    u = float(u)
    if not (u > 0 and math.isfinite(u)):
        raise DomainError(f"separation u must be positive and finite, got {u}")
    f, g = (float(x) for x in coupling_fg(u))
    den = 9 * g * g + (2 + f) ** 2
    return TriadCoupling(
        u, f, g,
        omega_plus=-g, omega_minus=-0.5 * g,
        gamma_plus=1 + 2 * f, gamma_minus=1 - f,
        h_plus=(2 + f) * (1 + 2 * f) / den,
        h_minus=(2 + f) * (1 - f) / den,
        h_zero=3 * g / den,
    )


# --- finite-distance spectrum ----------------------------------------------------

def spectral_weights_three(state: WLikeState, geom: TriangleGeometry, khat):
    """Closed-form Lorentzian weights (D+, D-) for real amplitudes.

    Individual weights, and at nonzero detuning even their Lorentzian-weighted
    sum, can dip below zero; the ``resolvent`` model does not.
    """
    if state.has_phases:
        raise ValueError("closed-form weights need real amplitudes; use model='resolvent'")
    m = eigenmodes_three(geom.u)
    c = state.physical_amplitudes().real
    cb = c.mean()
    kx = geom.atom_phases(khat)
    dp = 1.5 * cb * cb
    dm = 0.5 * (1 - 3 * cb * cb)
    for i in range(3):
        for j in range(i):
            ph = kx[i] - kx[j]
            cs, sn = np.cos(ph), np.sin(ph)
            side = c[i] + c[j] - 2 * cb
            odd = cb * (c[i] - c[j]) * m.h_zero * sn
            dp = dp + cb * (cb + side * m.h_plus) * cs + odd
            dm = dm + ((c[i] - cb) * (c[j] - cb) + cb * side * m.h_minus) * cs + odd
    return dp, dm


def emission_spectrum_three(state: WLikeState, geom: TriangleGeometry, omega=0.0,
                            khat=(0.0, 0.0, 1.0), *, model="auto"):
    """Emission density for detuning ``omega`` and direction ``khat``.

    ``model="lorentzian"`` uses the closed-form D+/D- weights (real amplitudes);
    ``"resolvent"`` adds the superradiant and subradiant pole amplitudes
    coherently and accepts complex amplitudes; ``"auto"`` picks the first
    when the state has no phases.
    """
    if model == "auto":
        model = "resolvent" if state.has_phases else "lorentzian"
    m = eigenmodes_three(geom.u)
    if model == "lorentzian":
        dp, dm = spectral_weights_three(state, geom, khat)
        lp, lm = m.lorentzians(omega)
        out = dp * lp + dm * lm
    elif model == "resolvent":
        a = state.physical_amplitudes()
        ab = a.mean()
        kx = geom.atom_phases(khat)
        ph = np.exp(-1j * kx)
        op, om = m.poles
        omega = np.asarray(omega, dtype=float)
        sym = ab * sum(ph[j] for j in range(3))
        rest = sum((a[j] - ab) * ph[j] for j in range(3))
        amp = sym / (omega - op) + rest / (omega - om)
        out = 0.5 * np.abs(amp) ** 2
    else:
        raise ValueError(f"unknown model {model!r}")
    return out if np.ndim(out) else float(out)


def farfield_spectrum_three(state: WLikeState, geom: TriangleGeometry, omega=0.0,
                            khat=(0.0, 0.0, 1.0)):
    """Large-separation limit: one Lorentzian times the triple-slit bracket."""
    a = state.physical_amplitudes()
    ph = np.exp(-1j * geom.atom_phases(khat))
    bracket = np.abs(sum(a[j] * ph[j] for j in range(3))) ** 2
    out = 0.5 * bracket / (np.asarray(omega, dtype=float) ** 2 + 0.25)
    return out if np.ndim(out) else float(out)


# --- torus picture ------------------------------------------------------------------

def _shifted(state, theta1, theta2):
    p2, p3 = state.phases
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    theta3 = -theta1 - theta2
    return theta1 - p2 + p3, theta2 - p3, theta3 + p2


def farfield_intensity(state: WLikeState, theta1, theta2):
    """Triple-slit intensity on the torus, theta3 = -theta1 - theta2."""
    c1, c2, c3 = state.c
    t1, t2, t3 = _shifted(state, theta1, theta2)
    out = 1 + 2 * (c2 * c3 * np.cos(t1) + c3 * c1 * np.cos(t2) + c1 * c2 * np.cos(t3))
    # rounding can leave -1e-16 at an exact zero of the W fringe
    out = np.maximum(out, 0.0)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class FringeExtrema:
    imax: float
    imin: float
    min_angles: tuple
    max_angles: tuple

    @property
    def visibility(self):
        return (self.imax - self.imin) / (self.imax + self.imin)


def fringe_extrema_three(state: WLikeState) -> FringeExtrema:
    """Closed-form extrema of the triple-slit intensity and where they sit.

    Angles are returned as (theta1, theta2, theta3) in the state's own torus
    coordinates (phase shifts included), each wrapped to (-pi, pi].
    """
    c1, c2, c3 = state.c
    imax = (c1 + c2 + c3) ** 2
    if c1 <= c2 + c3:
        imin = 0.0
        pairs = ((c1, c2, c3), (c2, c3, c1), (c3, c1, c2))
        hat = []
        for cj, ck, cl in pairs:
            cos_t = (2 * cj * cj - 1) / (2 * ck * cl)
            if abs(cos_t) > 1 + 1e-12:
                raise InternalConsistencyError(f"cos(theta) = {cos_t} out of range")
            # all-negative branch; the sum is -2 pi, i.e. zero modulo 2 pi
            hat.append(-math.acos(min(1.0, max(-1.0, cos_t))))
    else:
        imin = (c1 - c2 - c3) ** 2
        hat = [0.0, math.pi, -math.pi]
    p2, p3 = state.phases

    def unshift(t):
        return (float(wrap_phase(t[0] + p2 - p3)), float(wrap_phase(t[1] + p3)),
                float(wrap_phase(t[2] - p2)))

    return FringeExtrema(imax, imin, unshift(hat), unshift((0.0, 0.0, 0.0)))


def visibility_three(state: WLikeState):
    c1, c2, c3 = state.c
    if c1 <= c2 + c3:
        return 1.0
    return 2 * c1 * (c2 + c3) / (1 + 2 * c2 * c3)


def visibility_three_bruteforce(state: WLikeState, n_grid=256):
    """Torus grid scan (kernel) plus Nelder-Mead polish of both extrema."""
    if n_grid < 256:
        raise ValueError("n_grid must be at least 256")
    c1, c2, c3 = state.c
    imax, ai, aj, imin, bi, bj = kernels.torus_extrema(c2 * c3, c3 * c1, c1 * c2, n_grid)
    h = 2 * math.pi / n_grid

    def torus(x):
        t1, t2 = x
        return 1 + 2 * (c2 * c3 * math.cos(t1) + c3 * c1 * math.cos(t2)
                        + c1 * c2 * math.cos(t1 + t2))

    opts = {"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000}
    r = minimize(lambda x: -torus(x), np.array([ai * h, aj * h]), method="Nelder-Mead", options=opts)
    imax = max(imax, -r.fun)
    r = minimize(torus, np.array([bi * h, bj * h]), method="Nelder-Mead", options=opts)
    imin = max(0.0, min(imin, r.fun))
    return (imax - imin) / (imax + imin)
