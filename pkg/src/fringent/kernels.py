"""Hot loops in two flavours: numba-compiled and plain numpy.

The public entry points dispatch on ``_accel.USE_NUMBA``. Both variants are
importable directly (``*_numba`` / ``*_numpy``) so tests and the benchmark can
compare them.
"""

import numpy as np

from . import _accel
from ._accel import njit

# --- torus scan ---------------------------------------------------------------


def torus_extrema_numpy(w1, w2, w3, n):
    """Extrema of 1 + 2(w1 cos t1 + w2 cos t2 + w3 cos(t1 + t2)) on an n x n grid.

    Returns ``(imax, i, j, imin, k, l)`` with grid indices into
    ``2*pi*arange(n)/n``.
    """
    t = 2.0 * np.pi * np.arange(n) / n
    c = np.cos(t)
    # cos(t1 + t2) indexed by (i + j) mod n keeps the grid exactly periodic
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    grid = 1.0 + 2.0 * (w1 * c[:, None] + w2 * c[None, :] + w3 * c[idx])
    a = int(np.argmax(grid))
    b = int(np.argmin(grid))
    return float(grid.flat[a]), a // n, a % n, float(grid.flat[b]), b // n, b % n


@njit(cache=True)
def torus_extrema_numba(w1, w2, w3, n):
    c = np.empty(n)
    for i in range(n):
        c[i] = np.cos(2.0 * np.pi * i / n)
    imax = -np.inf
    imin = np.inf
    ai = aj = bi = bj = 0
    for i in range(n):
        for j in range(n):
            v = 1.0 + 2.0 * (w1 * c[i] + w2 * c[j] + w3 * c[(i + j) % n])
            if v > imax:
                imax = v
                ai = i
                aj = j
            if v < imin:
                imin = v
                bi = i
                bj = j
    return imax, ai, aj, imin, bi, bj


def torus_extrema(w1, w2, w3, n):
    if _accel.USE_NUMBA:
        r = torus_extrema_numba(float(w1), float(w2), float(w3), int(n))
        return float(r[0]), int(r[1]), int(r[2]), float(r[3]), int(r[4]), int(r[5])
    return torus_extrema_numpy(w1, w2, w3, n)


# --- two-atom deviation grid --------------------------------------------------


def deviation_grid_numpy(s, f, g, lp, lm, thetas, phis):
    """max over the grid of |V_formal - s sin(theta)| with the grid argmax.

    ``lp`` and ``lm`` are the two Lorentzian factors at the chosen detuning.
    """
    st = np.sin(thetas)[:, None]
    ct = np.cos(thetas)[:, None]
    sx = s * st * np.cos(phis)[None, :]
    sy = s * st * np.sin(phis)[None, :]
    sz = s * ct
    xp = (1 + sx) * lp + (1 - sx) * lm
    xm = (1 + sx) * lp - (1 - sx) * lm
    eta = ((1 + f) * lp + (1 - f) * lm) * (sy - g * sz) / (1 + g * g)
    dev = np.abs(np.sqrt(xm * xm + eta * eta) / xp - s * st)
    k = int(np.argmax(dev))
    return float(dev.flat[k]), k // len(phis), k % len(phis)


@njit(cache=True)
def deviation_grid_numba(s, f, g, lp, lm, thetas, phis):
    best = -1.0
    bi = bj = 0
    ge = (1 + f) * lp + (1 - f) * lm
    for i in range(thetas.shape[0]):
        st = np.sin(thetas[i])
        sz = s * np.cos(thetas[i])
        for j in range(phis.shape[0]):
            sx = s * st * np.cos(phis[j])
            sy = s * st * np.sin(phis[j])
            xp = (1 + sx) * lp + (1 - sx) * lm
            xm = (1 + sx) * lp - (1 - sx) * lm
            eta = ge * (sy - g * sz) / (1 + g * g)
            d = abs(np.sqrt(xm * xm + eta * eta) / xp - s * st)
            if d > best:
                best = d
                bi = i
                bj = j
    return best, bi, bj


def deviation_grid(s, f, g, lp, lm, thetas, phis):
    thetas = np.ascontiguousarray(thetas, dtype=float)
    phis = np.ascontiguousarray(phis, dtype=float)
    if _accel.USE_NUMBA:
        d, i, j = deviation_grid_numba(float(s), float(f), float(g), float(lp), float(lm), thetas, phis)
        return float(d), int(i), int(j)
    return deviation_grid_numpy(s, f, g, lp, lm, thetas, phis)


# --- product-state overlap (alternating maximization) -------------------------


def product_overlap_numpy(psi, starts, iters, tol):
    """Largest |<a b c|psi>|^2 over unit product vectors.

    ``psi`` is a (2, 2, 2) complex tensor, ``starts`` an (m, 3, 2) array of
    initial single-qubit vectors. Each start is refined by alternately
    solving for one factor with the other two fixed. Returns the best value
    and its (3, 2) factors.
    """
    best = -1.0
    best_v = None
    for m in range(starts.shape[0]):
        a, b, c = (starts[m, q] / np.linalg.norm(starts[m, q]) for q in range(3))
        prev = -1.0
        for _ in range(iters):
            a = np.einsum("ijk,j,k->i", psi, b.conj(), c.conj())
            a /= np.linalg.norm(a)
            b = np.einsum("ijk,i,k->j", psi, a.conj(), c.conj())
            b /= np.linalg.norm(b)
            c = np.einsum("ijk,i,j->k", psi, a.conj(), b.conj())
            val = float(np.linalg.norm(c) ** 2)
            c /= np.linalg.norm(c)
            if abs(val - prev) < tol:
                break
            prev = val
        if val > best:
            best = val
            best_v = np.stack([a, b, c])
    return best, best_v


@njit(cache=True)
def product_overlap_numba(psi, starts, iters, tol):
    best = -1.0
    best_v = np.zeros((3, 2), dtype=np.complex128)
    for m in range(starts.shape[0]):
        a = starts[m, 0] / np.sqrt(np.sum(np.abs(starts[m, 0]) ** 2))
        b = starts[m, 1] / np.sqrt(np.sum(np.abs(starts[m, 1]) ** 2))
        c = starts[m, 2] / np.sqrt(np.sum(np.abs(starts[m, 2]) ** 2))
        prev = -1.0
        val = 0.0
        for _ in range(iters):
            na = np.zeros(2, dtype=np.complex128)
            for i in range(2):
                for j in range(2):
                    for k in range(2):
                        na[i] += psi[i, j, k] * np.conj(b[j]) * np.conj(c[k])
            a = na / np.sqrt(np.sum(np.abs(na) ** 2))
            nb = np.zeros(2, dtype=np.complex128)
            for i in range(2):
                for j in range(2):
                    for k in range(2):
                        nb[j] += psi[i, j, k] * np.conj(a[i]) * np.conj(c[k])
            b = nb / np.sqrt(np.sum(np.abs(nb) ** 2))
            nc = np.zeros(2, dtype=np.complex128)
            for i in range(2):
                for j in range(2):
                    for k in range(2):
                        nc[k] += psi[i, j, k] * np.conj(a[i]) * np.conj(b[j])
            val = np.sum(np.abs(nc) ** 2)
            c = nc / np.sqrt(val)
            if abs(val - prev) < tol:
                break
            prev = val
        if val > best:
            best = val
            best_v[0] = a
            best_v[1] = b
            best_v[2] = c
    return best, best_v


def product_overlap(psi, starts, iters=500, tol=1e-15):
    psi = np.ascontiguousarray(np.asarray(psi, dtype=complex).reshape(2, 2, 2))
    starts = np.ascontiguousarray(starts, dtype=complex)
    if _accel.USE_NUMBA:
        v, vecs = product_overlap_numba(psi, starts, int(iters), float(tol))
        return float(v), vecs
    return product_overlap_numpy(psi, starts, iters, tol)


# --- rejection acceptance -----------------------------------------------------


def accept_mask_numpy(density, envelope, uniforms):
    """Acceptance flags for rejection sampling; flags envelope violations.

    Returns ``(mask, worst)`` where ``worst`` is max(density/envelope) so the
    caller can detect an invalid envelope.
    """
    ratio = density / envelope
    return uniforms * envelope < density, float(np.max(ratio)) if ratio.size else 0.0


@njit(cache=True)
def accept_mask_numba(density, envelope, uniforms):
    n = density.shape[0]
    mask = np.empty(n, dtype=np.bool_)
    worst = 0.0
    for i in range(n):
        r = density[i] / envelope[i]
        if r > worst:
            worst = r
        mask[i] = uniforms[i] * envelope[i] < density[i]
    return mask, worst


def accept_mask(density, envelope, uniforms):
    density = np.ascontiguousarray(density, dtype=float)
    envelope = np.ascontiguousarray(np.broadcast_to(envelope, density.shape), dtype=float)
    uniforms = np.ascontiguousarray(uniforms, dtype=float)
    if _accel.USE_NUMBA:
        m, w = accept_mask_numba(density, envelope, uniforms)
        return m, float(w)
    return accept_mask_numpy(density, envelope, uniforms)
