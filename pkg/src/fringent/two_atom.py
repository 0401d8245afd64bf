"""Two pinned atoms: collective modes, emission spectrum, fringes and visibility.

Units: detunings and widths in units of the single-atom linewidth, lengths
through u = k0 r. The fringe phase is chi = k.r, which sweeps [-u, u] as the
photon direction covers the sphere.

Two spectral models are available:

``"lorentzian"``
    Two Lorentzians with the closed-form weights B+ and B-. At a single
    detuning it only sees the combination sy - g sz of the Bloch vector.
``"resolvent"``
    The pole amplitudes of each collective mode are added coherently before
    squaring. It agrees with ``"lorentzian"`` in the far field and stays
    nonnegative everywhere; it resolves sy and sz separately, which the
    exact tomography relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import kernels
from .errors import DomainError
from .states import TwoQubitBlochState, wrap_phase

MODELS = ("lorentzian", "resolvent")
PAULI = (
    np.eye(2),
    np.array([[0, 1], [1, 0]]),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]]),
)


def coupling_fg(u):
    u = np.asarray(u, dtype=float)
    return np.sin(u) / u, np.cos(u) / u


@dataclass(frozen=True)
class PairCoupling:
    u: float
    f: float
    g: float
    omega_plus: float
    omega_minus: float
    gamma_plus: float
    gamma_minus: float

    @property
    def peak_separation(self):
        return abs(self.omega_plus - self.omega_minus)

    def peak_separation_ratio(self):
        """(dw / gamma_plus, dw / gamma_minus)."""
        return self.peak_separation / self.gamma_plus, self.peak_separation / self.gamma_minus

    def lorentzians(self, omega):
        omega = np.asarray(omega, dtype=float)
        lp = 1.0 / ((omega - self.omega_plus) ** 2 + 0.25 * self.gamma_plus**2)
        lm = 1.0 / ((omega - self.omega_minus) ** 2 + 0.25 * self.gamma_minus**2)
        return lp, lm

    @property
    def poles(self):
        """Complex mode frequencies omega - i gamma/2."""
        return (complex(self.omega_plus, -0.5 * self.gamma_plus),
                complex(self.omega_minus, -0.5 * self.gamma_minus))


def _check_u(u):
    u = float(u)
    if not (u > 0.0) or not math.isfinite(u):
        raise DomainError(f"separation u = k0 r must be positive and finite, got {u}")
    return u


def eigenmodes_two(u) -> PairCoupling:
    u = _check_u(u)
    f, g = (float(x) for x in coupling_fg(u))
    return PairCoupling(u, f, g, -0.5 * g, 0.5 * g, 1.0 + f, 1.0 - f)


# --- spectrum -------------------------------------------------------------------

def spectral_weights_two(state: TwoQubitBlochState, u, chi):
    """Lorentzian weights (B+, B-) as functions of the fringe phase."""
    m = eigenmodes_two(u)
    chi = np.asarray(chi, dtype=float)
    sx = state.sx
    q = (state.sy - m.g * state.sz) / (1.0 + m.g * m.g)
    c, s = np.cos(chi), np.sin(chi)
    bp = 0.25 * ((1 + sx) * (1 + c) + (1 + m.f) * q * s)
    bm = 0.25 * ((1 - sx) * (1 - c) + (1 - m.f) * q * s)
    return bp, bm


def _mode_amplitudes(m: PairCoupling, omega, chi):
    """Photon amplitudes (A_eg, A_ge) for the two basis states."""
    omega = np.asarray(omega, dtype=float)
    chi = np.asarray(chi, dtype=float)
    op, om = m.poles
    rp = 1.0 / (omega - op)
    rm = 1.0 / (omega - om)
    e1 = np.exp(0.5j * chi)
    e2 = np.exp(-0.5j * chi)
    a_eg = 0.5 * (e1 * (rp + rm) + e2 * (rp - rm))
    a_ge = 0.5 * (e1 * (rp - rm) + e2 * (rp + rm))
    return a_eg, a_ge


def design_row_two(u, omega, chi, model="lorentzian"):
    """Coefficients (a0, ax, ay, az) with P = a0 + ax sx + ay sy + az sz.

    Broadcasts over ``omega`` and ``chi``; the last axis has length 4.
    """
    m = eigenmodes_two(u)
    if model == "lorentzian":
        lp, lm = m.lorentzians(omega)
        chi = np.asarray(chi, dtype=float)
        c, s = np.cos(chi), np.sin(chi)
        a0 = 0.25 * ((1 + c) * lp + (1 - c) * lm)
        ax = 0.25 * ((1 + c) * lp - (1 - c) * lm)
        aq = 0.25 * s * ((1 + m.f) * lp + (1 - m.f) * lm) / (1 + m.g * m.g)
        a0, ax, aq = np.broadcast_arrays(a0, ax, aq)
        return np.stack([a0, ax, aq, -m.g * aq], axis=-1)
    if model == "resolvent":
        a = _mode_amplitudes(m, omega, chi)
        cols = []
        for p in PAULI:
            # P = (1/2) A^T rho A*, rho = (1 + s.sigma)/2
            v = sum(a[i] * p[i, j] * np.conj(a[j]) for i in range(2) for j in range(2))
            cols.append(0.25 * np.real(v))
        cols = np.broadcast_arrays(*cols)
        return np.stack(cols, axis=-1)
    raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


def emission_spectrum_two(state: TwoQubitBlochState, u, omega=0.0, chi=0.0, *,
                          model="lorentzian", absolute=False, omega0=None):
    """Emission probability density for detuning ``omega`` and phase ``chi``.

    The direction-independent prefactor is dropped unless ``absolute`` is
    set, in which case ``omega0`` (atomic frequency in linewidth units, with
    c = 1 so k0 = omega0) restores it.
    """
    if model == "lorentzian":
        m = eigenmodes_two(u)
        bp, bm = spectral_weights_two(state, u, chi)
        lp, lm = m.lorentzians(omega)
        out = bp * lp + bm * lm
    else:
        row = design_row_two(u, omega, chi, model)
        out = row @ np.array([1.0, state.sx, state.sy, state.sz])
    if absolute:
        if omega0 is None or not omega0 > 0:
            raise DomainError("absolute output needs a positive omega0")
        out = out * (omega0 + np.asarray(omega)) / ((2 * math.pi) ** 2 * omega0**3)
    return out if np.ndim(out) else float(out)


# --- fringe parameters -----------------------------------------------------------

@dataclass(frozen=True)
class FringeProfile:
    """Fringe of the closed-form spectrum: I(chi) = (xi+ + A cos(chi - theta0))/4."""

    xi_plus: float
    xi_minus: float
    eta: float
    theta0: float
    chi: np.ndarray = field(default_factory=lambda: np.empty(0), compare=False)
    intensity: np.ndarray = field(default_factory=lambda: np.empty(0), compare=False)

    @property
    def amplitude(self):
        return math.hypot(self.xi_minus, self.eta)

    def __call__(self, chi):
        return 0.25 * (self.xi_plus + self.amplitude * np.cos(np.asarray(chi) - self.theta0))


def fringe_params_two(state: TwoQubitBlochState, u, omega=0.0, n_samples=0):
    m = eigenmodes_two(u)
    lp, lm = (float(x) for x in m.lorentzians(omega))
    sx = state.sx
    xp = (1 + sx) * lp + (1 - sx) * lm
    xm = (1 + sx) * lp - (1 - sx) * lm
    eta = ((1 + m.f) * lp + (1 - m.f) * lm) * (state.sy - m.g * state.sz) / (1 + m.g * m.g)
    theta0 = 0.0 if (xm == 0.0 and eta == 0.0) else float(wrap_phase(math.atan2(eta, xm)))
    prof = FringeProfile(xp, xm, eta, theta0)
    if n_samples:
        chi = np.linspace(-m.u, m.u, int(n_samples))
        prof = FringeProfile(xp, xm, eta, theta0, chi, prof(chi))
    return prof


def _cos_extrema_on_interval(theta0, half_width):
    """(max, min) of cos(chi - theta0) for chi in [-w, w]."""
    if half_width >= math.pi:
        return 1.0, -1.0
    ends = (math.cos(half_width - theta0), math.cos(-half_width - theta0))
    hi = 1.0 if abs(wrap_phase(theta0)) <= half_width else max(ends)
    lo = -1.0 if abs(wrap_phase(theta0 + math.pi)) <= half_width else min(ends)
    return hi, lo


def visibility_two(state: TwoQubitBlochState, u, omega=0.0, mode="formal"):
    """Fringe visibility at fixed detuning.

    ``formal`` takes the extrema over an unrestricted phase; ``physical``
    restricts chi to [-u, u], the phases reachable by real directions.
    """
    p = fringe_params_two(state, u, omega)
    if mode == "formal":
        return p.amplitude / p.xi_plus
    if mode == "physical":
        hi, lo = _cos_extrema_on_interval(p.theta0, float(u))
        imax = p.xi_plus + p.amplitude * hi
        imin = p.xi_plus + p.amplitude * lo
        return (imax - imin) / (imax + imin)
    raise ValueError(f"mode must be 'formal' or 'physical', got {mode!r}")


def visibility_two_bruteforce(state: TwoQubitBlochState, u, omega=0.0, n_grid=4096,
                              mode="formal", model="lorentzian"):
    """Grid scan of the spectrum over chi with refinement at the extrema."""
    if n_grid < 1000:
        raise ValueError("n_grid must be at least 1000")
    u = float(u)

    def spec(x):
        return emission_spectrum_two(state, u, omega, x, model=model)

    if mode == "formal":
        h = 2 * math.pi / n_grid
        chi = h * np.arange(n_grid)
        periodic = True
    elif mode == "physical":
        chi = np.linspace(-u, u, n_grid)
        h = chi[1] - chi[0]
        periodic = False
    else:
        raise ValueError(f"mode must be 'formal' or 'physical', got {mode!r}")
    vals = np.asarray(spec(chi))

    def refine(k, sign):
        if not periodic and (k == 0 or k == n_grid - 1):
            return float(vals[k])
        y0, y1, y2 = vals[k - 1], vals[k], vals[(k + 1) % n_grid]
        den = y0 - 2 * y1 + y2
        x = chi[k] + (0.5 * h * (y0 - y2) / den if den != 0 else 0.0)
        lo, hi = chi[k] - h, chi[k] + h
        x = min(max(x, lo), hi)
        r = minimize_scalar(lambda t: sign * spec(t), bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-12})
        return float(sign * min(sign * spec(x), r.fun, sign * y1))

    imax = refine(int(np.argmax(vals)), -1.0)
    imin = refine(int(np.argmin(vals)), 1.0)
    return (imax - imin) / (imax + imin)


# --- deviation scan --------------------------------------------------------------

@dataclass(frozen=True)
class DeviationResult:
    max_dev: float
    theta_star: float
    phi_star: float


def s0_visibility(u):
    """Closed-form formal visibility of the maximally mixed state at omega = 0."""
    u = np.asarray(u, dtype=float)
    return 2 * u * np.abs(np.sin(u)) / (1 + u * u)


def deviation_max(s, u, omega=0.0, n_theta=64, n_phi=128, refine=True) -> DeviationResult:
    """Largest |V - C| over the Bloch angles at fixed purity ``s``.

    Grid search (numba kernel when enabled) followed by a Nelder-Mead polish
    from the best grid point. Fully deterministic.
    """
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"purity s={s} outside [0, 1]")
    m = eigenmodes_two(u)
    lp, lm = (float(x) for x in m.lorentzians(omega))
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = 2 * math.pi * np.arange(n_phi) / n_phi
    best, i, j = kernels.deviation_grid(s, m.f, m.g, lp, lm, thetas, phis)
    t_star, p_star = float(thetas[i]), float(phis[j])
    if refine and s > 0.0:
        def neg_dev(x):
            st = TwoQubitBlochState(s, min(max(x[0], 0.0), math.pi), x[1])
            return -abs(visibility_two(st, u, omega) - s * math.sin(st.theta))

        r = minimize(neg_dev, np.array([t_star, p_star]), method="Nelder-Mead",
                     options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        if -r.fun > best:
            best = float(-r.fun)
            t_star = min(max(float(r.x[0]), 0.0), math.pi)
            p_star = float(r.x[1]) % (2 * math.pi)
    return DeviationResult(best, t_star, p_star)
