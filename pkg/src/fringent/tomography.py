"""State reconstruction from fringe intensities.

Two atoms
    ``tomography_two_firstorder``: the closed-form three-step inversion of the
    first-order fringe expansion (needs f, g and sx all nonzero).
    ``tomography_two_exact``: weighted linear least squares on the full
    spectrum, which is affine in the Bloch vector at fixed geometry. Several
    detunings are required to separate sy from sz.
Three atoms
    ``tomography_three``: products c_i c_j and phases (phi2, phi3) from the
    triple-slit pattern, linear initial guess then nonlinear least squares.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    IllPosedError,
    InfeasibleReconstructionError,
    SingularSchemeError,
)
from .states import TwoQubitBlochState, WLikeState, canonicalize, wrap_phase
from .two_atom import design_row_two, eigenmodes_two

NORMALIZATIONS = ("absolute", "shape_only")
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass
class FringeSampleSet:
    """Sampled fringe intensities.

    ``phases`` is (n,) fringe phases for two atoms or (n, 2) torus angles
    (theta1, theta2) for three atoms. Binned data (photon counts) sets
    ``bin_edges``: (n, 2) phase intervals for two atoms, (n, 4) rectangles
    (t1_lo, t1_hi, t2_lo, t2_hi) for three. ``omega_edges`` (n, 2) likewise
    marks two-atom detuning bins. Binned intensities are integrals over the
    bin, not averages.
    """

    phases: np.ndarray
    intensities: np.ndarray
    u: float = math.inf
    omegas: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    normalization: str = "shape_only"
    bin_edges: Optional[np.ndarray] = None
    omega_edges: Optional[np.ndarray] = None

    def __post_init__(self):
        self.phases = np.asarray(self.phases, dtype=float)
        self.intensities = np.asarray(self.intensities, dtype=float).reshape(-1)
        n = self.intensities.size
        if self.phases.shape[0] != n:
            raise ValueError("phases and intensities differ in length")
        self.omegas = np.zeros(n) if self.omegas is None else np.broadcast_to(
            np.asarray(self.omegas, dtype=float), (n,)).copy()
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
            if self.weights.size != n or np.any(self.weights < 0):
                raise ValueError("weights must be nonnegative, one per sample")
        if self.bin_edges is not None:
            self.bin_edges = np.asarray(self.bin_edges, dtype=float).reshape(n, -1)
        if self.omega_edges is not None:
            self.omega_edges = np.asarray(self.omega_edges, dtype=float).reshape(n, 2)
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if not np.all(np.isfinite(self.intensities)) or np.any(self.intensities < 0):
            raise ValueError("intensities must be finite and nonnegative")

    def __len__(self):
        return self.intensities.size

    @property
    def sqrt_weights(self):
        return np.ones(len(self)) if self.weights is None else np.sqrt(self.weights)


# --- two atoms: first-order scheme -----------------------------------------------

def firstorder_intensity_two(state: TwoQubitBlochState, u, chi, scale=1.0):
    """First-order fringe: K[1 - 2f sx + (sx - 2f) cos chi + (sy - g sz) sin chi]."""
    m = eigenmodes_two(u)
    chi = np.asarray(chi, dtype=float)
    sx, sy, sz = state.sx, state.sy, state.sz
    return scale * (1 - 2 * m.f * sx + (sx - 2 * m.f) * np.cos(chi) + (sy - m.g * sz) * np.sin(chi))


def firstorder_theta0_two(state: TwoQubitBlochState, u):
    """Pattern shift to first order: atan((sy - g sz)/sx - 2 f sy / sx^2)."""
    m = eigenmodes_two(u)
    sx = state.sx
    if sx == 0:
        raise SingularSchemeError("first-order shift is undefined for sx = 0")
    return math.atan((state.sy - m.g * state.sz) / sx - 2 * m.f * state.sy / sx**2)


@dataclass(frozen=True)
class FirstOrderResult:
    state: TwoQubitBlochState
    vector: tuple
    truncation_error: float
    projected: bool


def _pick(samples, target):
    d = np.abs(np.vectorize(wrap_phase)(samples.phases - target))
    hits = np.flatnonzero(d < 1e-9)
    if hits.size == 0:
        raise IllPosedError(f"no sample at phase {target:.6g}")
    return float(np.mean(samples.intensities[hits]))


def _project(vec):
    r = float(np.linalg.norm(vec))
    if r > 1.0:
        return vec / r, True
    return vec, False


def tomography_two_firstorder(samples: FringeSampleSet, theta0_measured, u=None) -> FirstOrderResult:
    """Invert the first-order fringe using the samples at chi = 0, pi, +-pi/2
    and the measured pattern shift.

    Raises SingularSchemeError when sx, f or g vanishes, since the shift
    relation then no longer separates sy from sz; use tomography_two_exact.
    """
    m = eigenmodes_two(samples.u if u is None else u)
    f, g = m.f, m.g
    p0, ppi = _pick(samples, 0.0), _pick(samples, math.pi)
    pp, pm = _pick(samples, 0.5 * math.pi), _pick(samples, -0.5 * math.pi)
    if p0 + ppi <= 0:
        raise IllPosedError("zero total intensity")
    q = (p0 - ppi) / (p0 + ppi)
    sx = (q + 2 * f) / (1 + 2 * f * q)
    scale = (p0 + ppi) / (2 * (1 - 2 * f * sx))
    comb = (pp - pm) / (2 * scale)
    if abs(sx) < 1e-12:
        raise SingularSchemeError("sx = 0: the shift relation is singular; use tomography_two_exact")
    if abs(f) < 1e-12 or abs(g) < 1e-12:
        raise SingularSchemeError(
            f"f = {f:.3g}, g = {g:.3g}: sy and sz cannot be separated at this separation; "
            "use tomography_two_exact")
    sy = sx * (comb - sx * math.tan(theta0_measured)) / (2 * f)
    sz = (sy - comb) / g
    vec, projected = _project(np.array([sx, sy, sz]))
    # second-order terms, amplified by the 1/f and 1/g divisions
    trunc = (f * f + g * g) / min(abs(f), abs(g))
    return FirstOrderResult(TwoQubitBlochState.from_vector(*vec), (sx, sy, sz), trunc, projected)


# --- two atoms: exact linear fit --------------------------------------------------

@dataclass(frozen=True)
class ExactFitResult:
    state: TwoQubitBlochState
    vector: tuple
    residual: float
    covariance: np.ndarray
    scale: float
    projected: bool

    @property
    def stderr(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))


def _gauss(edges, points, panels=1):
    """Composite Gauss-Legendre nodes and weights (n, 8 * panels) over each
    row's [lo, hi]."""
    if edges is None:
        return np.asarray(points, dtype=float)[:, None], np.ones((len(points), 1))
    lo, hi = edges[:, 0:1], edges[:, 1:2]
    half = 0.5 * (hi - lo) / panels
    mids = lo + half * (2 * np.arange(panels)[None, :] + 1)
    x = (mids[:, :, None] + half[:, :, None] * _GL_NODES[None, None, :]).reshape(len(lo), -1)
    w = np.broadcast_to(half[:, :, None] * _GL_WEIGHTS[None, None, :], (len(lo), panels, 8))
    return x, w.reshape(len(lo), -1)


def _design_two(samples: FringeSampleSet, u, model):
    if samples.bin_edges is None and samples.omega_edges is None:
        return design_row_two(u, samples.omegas, samples.phases, model)
    cx, cw = _gauss(samples.bin_edges, samples.phases)
    # Lorentzian lines are sharp on the scale of a detuning bin
    ox, ow = _gauss(samples.omega_edges, samples.omegas, panels=8)
    rows = design_row_two(u, ox[:, :, None], cx[:, None, :], model)
    return np.einsum("nabp,na,nb->np", rows, ow, cw)


def tomography_two_exact(samples: FringeSampleSet, u=None, model="resolvent",
                         rcond=1e-10) -> ExactFitResult:
    """Bloch vector by weighted linear least squares on the full spectrum.

    ``shape_only`` fits K(1, sx, sy, sz) and divides out the scale K;
    ``absolute`` takes K = 1. Raises IllPosedError when the design cannot
    separate the unknowns, e.g. all samples at one detuning.
    """
    u = samples.u if u is None else u
    X = _design_two(samples, u, model)
    y = samples.intensities
    w = samples.sqrt_weights
    if samples.normalization == "absolute":
        A, b = X[:, 1:] * w[:, None], (y - X[:, 0]) * w
    else:
        A, b = X * w[:, None], y * w
    p = A.shape[1]
    sv = np.linalg.svd(A, compute_uv=False)
    if A.shape[0] < p or sv[-1] <= rcond * sv[0]:
        raise IllPosedError(
            f"design has rank < {p} (singular values {sv / sv[0]}); sample more phases or detunings")
    beta, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = b - A @ beta
    dof = max(A.shape[0] - p, 1)
    AtA_inv = np.linalg.inv(A.T @ A)
    sigma2 = 1.0 if samples.weights is not None else float(resid @ resid) / dof
    cov_beta = sigma2 * AtA_inv
    if samples.normalization == "absolute":
        vec, scale, cov = beta, 1.0, cov_beta
    else:
        scale = float(beta[0])
        if scale <= 0:
            raise IllPosedError("fitted overall scale is not positive")
        vec = beta[1:] / scale
        J = np.hstack([-vec[:, None] / scale, np.eye(3) / scale])
        cov = J @ cov_beta @ J.T
    rms = float(math.sqrt(float(resid @ resid) / len(b)))
    proj, projected = _project(np.asarray(vec, dtype=float))
    return ExactFitResult(TwoQubitBlochState.from_vector(*proj), tuple(float(x) for x in vec),
                          rms, cov, scale, projected)


def synthetic_samples_two(state: TwoQubitBlochState, u, chis, omegas=(0.0,), model="resolvent",
                          scale=1.0, normalization="shape_only"):
    """Noiseless samples on the product grid of ``chis`` and ``omegas``."""
    from .two_atom import emission_spectrum_two

    W, C = np.meshgrid(np.asarray(omegas, dtype=float), np.asarray(chis, dtype=float), indexing="ij")
    vals = scale * emission_spectrum_two(state, u, W.ravel(), C.ravel(), model=model)
    return FringeSampleSet(C.ravel(), vals, u=u, omegas=W.ravel(), normalization=normalization)


# --- three atoms -------------------------------------------------------------------

DEFAULT_TORUS_DESIGN = np.array(
    [(a, b) for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3) for b in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
)


@dataclass(frozen=True)
class ThreeAtomResult:
    state: WLikeState
    products: tuple
    phases: tuple
    scale: float
    residual: float
    norm_residual: float


def _torus_model(params, t1, t2):
    K, p1, p2, p3, f2, f3 = params
    t3 = -t1 - t2
    return K * (1 + 2 * (p1 * np.cos(t1 - f2 + f3) + p2 * np.cos(t2 - f3) + p3 * np.cos(t3 + f2)))


def _linear_torus_design(t1, t2):
    t3 = -t1 - t2
    return np.stack([np.ones_like(t1), np.cos(t1), np.sin(t1), np.cos(t2), np.sin(t2),
                     np.cos(t3), np.sin(t3)], axis=1)


def _distinct_points(t1, t2):
    keys = {(round(float(wrap_phase(a)), 9), round(float(wrap_phase(b)), 9)) for a, b in zip(t1, t2)}
    return len(keys)


def tomography_three(samples: FringeSampleSet, norm_tol=1e-6, rcond=1e-10) -> ThreeAtomResult:
    """W-like amplitudes and phases from triple-slit intensities on the torus."""
    ph = np.asarray(samples.phases, dtype=float)
    if ph.ndim != 2 or ph.shape[1] != 2:
        raise ValueError("three-atom samples need (theta1, theta2) pairs")
    y = samples.intensities
    w = samples.sqrt_weights
    if _distinct_points(ph[:, 0], ph[:, 1]) < 7:
        raise IllPosedError("need at least 7 distinct torus points to separate products and phases")
    if samples.bin_edges is None:
        t1, t2, qw = ph[:, 0:1], ph[:, 1:2], np.ones((len(y), 1))
    else:
        e = samples.bin_edges
        a, wa = _gauss(e[:, 0:2], None)
        b, wb = _gauss(e[:, 2:4], None)
        k = a.shape[1]
        t1 = np.repeat(a, k, axis=1)
        t2 = np.tile(b, (1, k))
        qw = np.repeat(wa, k, axis=1) * np.tile(wb, (1, k))
    n, k = t1.shape
    lin = _linear_torus_design(t1.ravel(), t2.ravel()).reshape(n, k, 7)
    A = np.einsum("nkp,nk->np", lin, qw) * w[:, None]
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= rcond * sv[0]:
        raise IllPosedError("torus design is rank deficient")
    beta, *_ = np.linalg.lstsq(A, y * w, rcond=None)
    K = beta[0]
    if K <= 0:
        raise InfeasibleReconstructionError("fitted constant term is not positive")
    # a_j cos t + b_j sin t = 2 K p_j cos(t + d_j): a = 2Kp cos d, b = -2Kp sin d
    amp = [math.hypot(beta[1 + 2 * j], beta[2 + 2 * j]) / (2 * K) for j in range(3)]
    d = [math.atan2(-beta[2 + 2 * j], beta[1 + 2 * j]) for j in range(3)]
    x0 = np.array([K, *amp, d[2], -d[1]])

    def resid(x):
        return (np.sum(_torus_model(x, t1, t2) * qw, axis=1) - y) * w

    fit = least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
    K, p1, p2, p3, f2, f3 = fit.x
    if min(p1, p2, p3) <= 0:
        raise InfeasibleReconstructionError(f"nonpositive product in {(p1, p2, p3)}")
    c = np.sqrt([p2 * p3 / p1, p3 * p1 / p2, p1 * p2 / p3])
    norm_res = float(np.sum(c * c) - 1.0)
    if abs(norm_res) > norm_tol:
        raise InfeasibleReconstructionError(f"amplitudes violate normalization by {norm_res:.3g}")
    if min(p1, p2, p3) < 1e-6 * max(p1, p2, p3):
        warnings.warn("smallest amplitude is nearly zero; phases are poorly conditioned",
                      RuntimeWarning, stacklevel=2)
    c = c / np.linalg.norm(c)
    ordered = np.sort(c)[::-1]
    if np.max(np.abs(ordered - c)) < 1e-9:
        # already canonical up to ties; keep the data's slot order
        state = WLikeState(tuple(ordered), (float(f2), float(f3)))
    else:
        state = canonicalize(c * np.exp(1j * np.array([0.0, f2, f3])))[0]
    rms = float(math.sqrt(np.mean(fit.fun**2)))
    return ThreeAtomResult(state, (float(p1), float(p2), float(p3)),
                           (float(wrap_phase(f2)), float(wrap_phase(f3))), float(K), rms, norm_res)


def synthetic_samples_three(state: WLikeState, points=None, scale=1.0):
    """Noiseless triple-slit samples at torus ``points`` (default 3 x 3 grid)."""
    from .three_atom import farfield_intensity

    pts = DEFAULT_TORUS_DESIGN if points is None else np.asarray(points, dtype=float)
    vals = scale * farfield_intensity(state, pts[:, 0], pts[:, 1])
    return FringeSampleSet(pts, np.maximum(vals, 0.0))
