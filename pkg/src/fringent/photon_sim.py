"""Monte Carlo photon emission by rejection sampling.

Directions are uniform on the sphere in the proposal. Two atoms sit on the z
axis at +-u/2 (units of 1/k0), so the fringe phase is chi = u dz. In
``filtered`` mode the detuning is fixed; in ``spectral`` mode it is drawn from
a Lorentzian mixture truncated to a window 50 linewidths beyond the outer
line centre on each side.

Sampling is split into chunks, each with its own generator spawned from the
seed, so the stream depends only on (seed, chunk index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EnvelopeError, InsufficientDataError
from .states import TwoQubitBlochState, WLikeState
from .three_atom import TriangleGeometry, eigenmodes_three, emission_spectrum_three, spectral_weights_three
from .two_atom import _cos_extrema_on_interval, emission_spectrum_two, eigenmodes_two, spectral_weights_two

CHUNK = 1 << 16
WINDOW = 50.0


@dataclass
class PhotonSamples:
    """Struct-of-arrays batch of detected photons."""

    omega: np.ndarray
    direction: np.ndarray
    phase: np.ndarray  # chi for two atoms, (theta1, theta2, theta3) for three
    u: float

    def __len__(self):
        return self.omega.size

    def rows(self):
        return np.column_stack([self.omega, self.direction])


# --- helpers ------------------------------------------------------------------------

def _directions(rng, n):
    dz = 2.0 * rng.random(n) - 1.0
    az = 2.0 * math.pi * rng.random(n)
    rho = np.sqrt(np.clip(1.0 - dz * dz, 0.0, None))
    return np.column_stack([rho * np.cos(az), rho * np.sin(az), dz])


class _LorentzMixture:
    """Proposal w+ L+ + w- L- on a finite window, with exact truncated sampling."""

    def __init__(self, centers, widths, weights, lo, hi):
        self.c = np.asarray(centers, dtype=float)
        self.b = 0.5 * np.asarray(widths, dtype=float)
        self.w = np.asarray(weights, dtype=float)
        self.lo, self.hi = lo, hi
        self.a_lo = np.arctan((lo - self.c) / self.b)
        self.a_hi = np.arctan((hi - self.c) / self.b)
        mass = self.w * (self.a_hi - self.a_lo) / self.b
        self.p = mass / mass.sum()

    def envelope(self, omega):
        omega = np.asarray(omega, dtype=float)
        return sum(self.w[j] / ((omega - self.c[j]) ** 2 + self.b[j] ** 2) for j in range(2))

    def sample(self, rng, n):
        comp = (rng.random(n) >= self.p[0]).astype(int)
        t = rng.random(n)
        a = self.a_lo[comp] + t * (self.a_hi[comp] - self.a_lo[comp])
        return self.c[comp] + self.b[comp] * np.tan(a)


def _run_chunks(n, seed, draw):
    """Call ``draw(rng, k)`` per chunk until each chunk holds k accepted rows."""
    if n <= 0:
        return None
    n_chunks = -(-n // CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    parts = []
    for i, ss in enumerate(children):
        k = CHUNK if i < n_chunks - 1 else n - CHUNK * (n_chunks - 1)
        rng = np.random.default_rng(ss)
        got, total = [], 0
        while total < k:
            batch = draw(rng, max(2 * (k - total), 1024))
            got.append(batch)
            total += batch[0].size
        parts.append([np.concatenate([g[j] for g in got])[:k] for j in range(len(got[0]))])
    return [np.concatenate([p[j] for p in parts]) for j in range(len(parts[0]))]


def _accept(rng, density, envelope):
    if np.any(density < -1e-12 * np.max(envelope)):
        raise EnvelopeError(f"negative emission density {density.min():.3g}")
    mask, worst = kernels.accept_mask(density, envelope, rng.random(density.size))
    if worst > 1.0 + 1e-9:
        raise EnvelopeError(f"density exceeds the envelope by a factor {worst:.6g}")
    return mask


def _empty(u, phase_cols):
    shape = (0,) if phase_cols == 1 else (0, phase_cols)
    return PhotonSamples(np.empty(0), np.empty((0, 3)), np.empty(shape), u)


# --- two atoms ------------------------------------------------------------------------

def _two_atom_envelope(state, m, model):
    """Direction-independent weights (w+, w-) with P(omega, chi) <= w+ L+ + w- L-."""
    if model == "lorentzian":
        q = (state.sy - m.g * state.sz) / (1 + m.g * m.g)
        out = []
        for sign, kappa in ((1, 1 + m.f), (-1, 1 - m.f)):
            a = 1 + sign * state.sx
            out.append(0.25 * (a + math.hypot(a, kappa * q)))
        return out
    lam = 0.5 * (1 + state.s)
    return [lam, lam]


def sample_photons_two(state: TwoQubitBlochState, u, N, seed=0, omega_mode="filtered", omega=0.0,
                       model="lorentzian") -> PhotonSamples:
    u = float(u)
    m = eigenmodes_two(u)
    N = int(N)
    if N <= 0:
        return _empty(u, 1)
    wp, wm = _two_atom_envelope(state, m, model)
    centers = (m.omega_plus, m.omega_minus)
    widths = (m.gamma_plus, m.gamma_minus)
    lo, hi = min(centers) - WINDOW, max(centers) + WINDOW
    mix = _LorentzMixture(centers, widths, (wp, wm), lo, hi)
    if omega_mode not in ("filtered", "spectral"):
        raise ValueError("omega_mode must be 'filtered' or 'spectral'")

    def draw(rng, k):
        d = _directions(rng, k)
        chi = u * d[:, 2]
        if omega_mode == "filtered":
            om = np.full(k, float(omega))
        else:
            om = mix.sample(rng, k)
        dens = np.asarray(emission_spectrum_two(state, u, om, chi, model=model))
        keep = _accept(rng, dens, mix.envelope(om))
        return om[keep], d[keep], chi[keep]

    om, d, chi = _run_chunks(N, seed, draw)
    return PhotonSamples(om, d, chi, u)


# --- three atoms ------------------------------------------------------------------------

def _three_atom_envelope(state, geom, model):
    m = eigenmodes_three(geom.u)
    if model == "lorentzian":
        c = state.physical_amplitudes().real
        cb = c.mean()
        bound_p, bound_m = 1.5 * cb * cb, abs(0.5 * (1 - 3 * cb * cb))
        for i in range(3):
            for j in range(i):
                side = c[i] + c[j] - 2 * cb
                odd = cb * (c[i] - c[j]) * m.h_zero
                bound_p += math.hypot(cb * (cb + side * m.h_plus), odd)
                bound_m += math.hypot((c[i] - cb) * (c[j] - cb) + cb * side * m.h_minus, odd)
        return m, (bound_p, bound_m)
    a = state.physical_amplitudes()
    ab = a.mean()
    rest = float(np.sum(np.abs(a - ab)))
    return m, (9 * abs(ab) ** 2, rest * rest)


def sample_photons_three(state: WLikeState, geom: TriangleGeometry, N, seed=0, omega_mode="filtered",
                         omega=0.0, model="auto") -> PhotonSamples:
    if model == "auto":
        model = "resolvent" if state.has_phases else "lorentzian"
    N = int(N)
    if N <= 0:
        return _empty(geom.u, 3)
    m, (wp, wm) = _three_atom_envelope(state, geom, model)
    centers = (m.omega_plus, m.omega_minus)
    lo, hi = min(centers) - WINDOW, max(centers) + WINDOW
    # keep the proposal valid when one weight vanishes
    tiny = 1e-300
    mix = _LorentzMixture(centers, (m.gamma_plus, m.gamma_minus), (max(wp, tiny), max(wm, tiny)), lo, hi)

    def draw(rng, k):
        d = _directions(rng, k)
        om = np.full(k, float(omega)) if omega_mode == "filtered" else mix.sample(rng, k)
        dens = np.asarray(emission_spectrum_three(state, geom, om, d, model=model))
        keep = _accept(rng, dens, mix.envelope(om))
        return om[keep], d[keep]

    om, d = _run_chunks(N, seed, draw)
    return PhotonSamples(om, d, geom.phases(d).T, geom.u)


# --- histograms and visibility ----------------------------------------------------------

@dataclass
class FringeHistogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def widths(self):
        return np.diff(self.edges)

    @property
    def intensity(self):
        """Probability density per unit phase."""
        return self.counts / (max(self.total, 1) * self.widths)

    @property
    def stderr(self):
        return np.sqrt(self.counts) / (max(self.total, 1) * self.widths)

    def rows(self):
        return np.column_stack([self.edges[:-1], self.edges[1:], self.counts, self.intensity, self.stderr])


def fringe_histogram(samples_or_phase, bins=64, range=None):
    """Histogram of fringe phase; the default range is [-u, u] for samples."""
    if isinstance(samples_or_phase, PhotonSamples):
        phase = samples_or_phase.phase
        if range is None:
            range = (-samples_or_phase.u, samples_or_phase.u)
    else:
        phase = np.asarray(samples_or_phase, dtype=float)
    if phase.ndim != 1:
        raise ValueError("fringe_histogram expects a one-dimensional phase")
    counts, edges = np.histogram(phase, bins=bins, range=range)
    return FringeHistogram(edges, counts)


def _harmonic_fit(edges, counts):
    """Bin-integrated fit of a + b cos(chi) + c sin(chi) with Poisson weights."""
    lo, hi = edges[:-1], edges[1:]
    X = np.column_stack([hi - lo, np.sin(hi) - np.sin(lo), np.cos(lo) - np.cos(hi)])
    w = 1.0 / np.sqrt(np.maximum(counts, 1.0))
    beta, *_ = np.linalg.lstsq(X * w[:, None], counts * w, rcond=None)
    return beta


def _visibility_from_fit(beta, span):
    a, b, c = beta
    amp = math.hypot(b, c)
    if a <= 0:
        return float("nan")
    half = 0.5 * span
    hi, lo = _cos_extrema_on_interval(math.atan2(c, b), half)
    imax, imin = a + amp * hi, a + amp * lo
    return (imax - imin) / (imax + imin)


def estimate_visibility(hist: FringeHistogram, n_boot=200, seed=0):
    """Visibility from a single-harmonic fit with a multinomial bootstrap error.

    The fit assumes the histogram range is centred on zero phase (as for
    [-u, u]); extrema are taken over that range only.
    """
    if hist.counts.size < 32:
        raise InsufficientDataError(f"need at least 32 bins, got {hist.counts.size}")
    n = hist.total
    if n < 100:
        raise InsufficientDataError(f"need at least 100 counts, got {n}")
    centre = 0.5 * (hist.edges[0] + hist.edges[-1])
    edges = hist.edges - centre
    span = float(edges[-1] - edges[0])
    v = _visibility_from_fit(_harmonic_fit(edges, hist.counts.astype(float)), span)
    rng = np.random.default_rng(seed)
    p = hist.counts / n
    boots = np.array([
        _visibility_from_fit(_harmonic_fit(edges, rng.multinomial(n, p).astype(float)), span)
        for _ in np.arange(n_boot)
    ])
    return v, float(np.nanstd(boots, ddof=1))
