"""Entanglement measures: closed forms for the one-excitation states and
general density-matrix versions used to cross-check them."""

import math

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .errors import ConvergenceError, InvalidStateError
from .states import TwoQubitBlochState, WLikeState, density_matrix

SIGMA_Y = np.array([[0, -1j], [1j, 0]])


# --- general density-matrix tools ---------------------------------------------

def _nqubits(rho):
    n = int(round(math.log2(rho.shape[0])))
    if 2**n != rho.shape[0]:
        raise InvalidStateError("dimension is not a power of two")
    return n


def partial_transpose(rho, qubit):
    """Transpose ``qubit`` (0 = most significant) of an n-qubit operator."""
    rho = np.asarray(rho, dtype=complex)
    n = _nqubits(rho)
    t = rho.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    axes[qubit], axes[n + qubit] = axes[n + qubit], axes[qubit]
    return t.transpose(axes).reshape(rho.shape)


def partial_trace(rho, keep):
    """Reduced operator on the qubits listed in ``keep`` (sorted order)."""
    rho = np.asarray(rho, dtype=complex)
    n = _nqubits(rho)
    keep = sorted(keep)
    t = rho.reshape((2,) * (2 * n))
    traced = [q for q in range(n) if q not in keep]
    letters = "abcdefghijklmnop"
    row = [letters[q] for q in range(n)]
    col = [letters[q] if q in traced else letters[q].upper() for q in range(n)]
    out = "".join(letters[q] for q in keep) + "".join(letters[q].upper() for q in keep)
    d = 2 ** len(keep)
    return np.einsum("".join(row) + "".join(col) + "->" + out, t).reshape(d, d)


def negativity(rho, qubit):
    """||rho^{T_q}||_1 - 1 for the cut ``qubit`` vs the rest."""
    w = np.linalg.eigvalsh(partial_transpose(rho, qubit))
    return float(np.sum(np.abs(w)) - 1.0)


def concurrence_wootters(rho):
    """Wootters concurrence of a two-qubit density matrix.

    With rho = X X^dagger the Wootters lambdas are the singular values of
    X^T (sy x sy) X. Eigenvalues at rounding level are dropped from X so that
    pure states do not pick up sqrt(eps) noise.
    """
    rho = density_matrix(rho)
    if rho.shape != (4, 4):
        raise InvalidStateError("concurrence needs a 4x4 density matrix")
    w, v = np.linalg.eigh(rho)
    keep = w > 1e-14 * max(w.max(), 1.0)
    x = v[:, keep] * np.sqrt(w[keep])
    yy = np.kron(SIGMA_Y, SIGMA_Y).real
    r = np.zeros(4)
    sv = np.linalg.svd(x.T @ yy @ x, compute_uv=False)
    r[: len(sv)] = sv
    return float(max(0.0, r[0] - r[1] - r[2] - r[3]))


def concurrence_bloch(state: TwoQubitBlochState):
    return state.s * math.sin(state.theta)


# --- W-like closed forms -------------------------------------------------------

def _cut_index(j):
    if j not in (1, 2, 3):
        raise ValueError(f"cut index must be 1, 2 or 3, got {j}")
    return j - 1


def negativity_cut(state: WLikeState, j):
    """Negativity across the cut separating the atom carrying c_j (1-based)."""
    c = state.c[_cut_index(j)]
    return 2.0 * c * math.sqrt(max(0.0, 1.0 - c * c))


def negativity_cut_oracle(state: WLikeState, j):
    return negativity(state.density_matrix(), state.atoms[_cut_index(j)])


def negativity_max(state: WLikeState):
    return max(negativity_cut(state, j) for j in (1, 2, 3))


def mixedness(state: WLikeState):
    c1, c2, c3 = (x * x for x in state.c)
    return 8.0 / 3.0 * (c1 * c2 + c2 * c3 + c3 * c1)


def mixedness_oracle(rho):
    """Mean single-qubit linear entropy 2(1 - tr rho_j^2)."""
    rho = np.asarray(rho, dtype=complex)
    n = _nqubits(rho)
    vals = []
    for q in range(n):
        r = partial_trace(rho, [q])
        vals.append(2.0 * (1.0 - np.trace(r @ r).real))
    return float(np.mean(vals))


def geometric_measure_wlike(state: WLikeState):
    c1, c2, c3 = state.c
    if c1 * c1 <= c2 * c2 + c3 * c3:
        c0 = 0.5 * (c1 + c2 + c3)
        rad = max(c0 * (c0 - c1) * (c0 - c2) * (c0 - c3), 0.0)
        if rad == 0.0:
            # degenerate triangle only happens on the other branch
            return 1.0 - c1 * c1
        r2 = (c1 * c2 * c3) ** 2 / (16.0 * rad)
        return 1.0 - 4.0 * r2
    return 1.0 - c1 * c1


def three_pi(state: WLikeState):
    c = state.c
    p = (c[0] * c[1] * c[2]) ** 2
    total = 0.0
    for x in c:
        x2 = x * x
        # x^4 (sqrt(1 + 4p/x^6) - 1) rewritten to avoid cancellation for small p
        t = 4.0 * p / (x2 * x2 * x2)
        total += x2 * x2 * t / (math.sqrt(1.0 + t) + 1.0)
    return 4.0 / 3.0 * total


def three_pi_oracle(rho):
    """(1/3) sum_j [N_j(rho)^2 - 2 N^2(rho_j)] with rho_j the two-qubit
    reduction that discards atom j."""
    rho = np.asarray(rho, dtype=complex)
    total = 0.0
    for j in range(3):
        pair = partial_trace(rho, [q for q in range(3) if q != j])
        total += negativity(rho, j) ** 2 - 2.0 * negativity(pair, 0) ** 2
    return total / 3.0


# --- geometric measure by optimization ----------------------------------------

def _product_vector(angles):
    vecs = []
    for q in range(3):
        t, p = angles[2 * q], angles[2 * q + 1]
        vecs.append(np.array([math.cos(t / 2), complex(math.cos(p), math.sin(p)) * math.sin(t / 2)]))
    return vecs


def _as_pure_ket(psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 1:
        if psi.size != 8:
            raise InvalidStateError("expected an 8-component state vector")
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1.0) > 1e-10:
            raise InvalidStateError("state vector is not normalized")
        return psi / nrm
    rho = density_matrix(psi)
    if rho.shape != (8, 8):
        raise InvalidStateError("expected a three-qubit state")
    w, v = np.linalg.eigh(rho)
    if abs(w[-1] - 1.0) > 1e-8:
        raise InvalidStateError("geometric measure oracle needs a pure state")
    return v[:, -1]


def geometric_measure_numeric(psi, restarts=32, seed=0, tol=1e-6):
    """1 - max |<a b c|psi>|^2 over product states.

    Alternating maximization from ``restarts`` random starts, then a
    Nelder-Mead polish over the six Bloch angles of the best product.
    Raises ConvergenceError when the two stages disagree by more than ``tol``
    in the wrong direction, which signals a broken optimizer rather than a
    hard landscape.
    """
    ket = _as_pure_ket(psi)
    tensor = ket.reshape(2, 2, 2)
    rng = np.random.default_rng(seed)
    starts = rng.normal(size=(restarts, 3, 2)) + 1j * rng.normal(size=(restarts, 3, 2))
    # the computational basis products are natural seeds
    basis = np.zeros((8, 3, 2), dtype=complex)
    for k in range(8):
        for q in range(3):
            basis[k, q, (k >> (2 - q)) & 1] = 1.0
    starts = np.concatenate([basis + 1e-3 * starts[:8], starts])
    best, vecs = kernels.product_overlap(tensor, starts)

    x0 = []
    for v in vecs:
        v = v * np.exp(-1j * np.angle(v[0])) if abs(v[0]) > 0 else v
        x0 += [2 * math.atan2(abs(v[1]), abs(v[0])), float(np.angle(v[1]))]

    def neg_overlap(x):
        a, b, c = _product_vector(x)
        return -abs(np.einsum("ijk,i,j,k->", tensor, a.conj(), b.conj(), c.conj())) ** 2

    res = minimize(neg_overlap, np.array(x0), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
    polished = -float(res.fun)
    if not math.isfinite(polished) or polished < best - tol:
        raise ConvergenceError("product-state search did not converge", best=1.0 - best)
    return 1.0 - max(best, polished)
