"""Atomic states carrying one excitation.

Two atoms: a mixed state in span{|eg>, |ge>} written with a Bloch vector.
Three atoms: a pure W-like state c1|egg> + c2|geg> + c3|gge>.

Qubit convention for the 2**n embeddings: |g> is index 0, |e> is index 1,
atom 1 is the most significant bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidStateError

PSD_TOL = 1e-10


def wrap_phase(x):
    """Map angles into (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(y == -np.pi, np.pi, y)
    return float(y) if np.ndim(y) == 0 else y


@dataclass(frozen=True)
class TwoQubitBlochState:
    """rho = (1 + s.sigma)/2 on the basis (|eg>, |ge>).

    ``s`` is the length of the Bloch vector, ``theta`` and ``phi`` its polar
    and azimuthal angles.
    """

    s: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        s, theta = float(self.s), float(self.theta)
        if not (math.isfinite(s) and math.isfinite(theta) and math.isfinite(self.phi)):
            raise InvalidStateError("Bloch parameters must be finite")
        if s < -1e-12 or s > 1 + 1e-12:
            raise InvalidStateError(f"purity radius s={s} outside [0, 1]")
        if theta < -1e-12 or theta > math.pi + 1e-12:
            raise InvalidStateError(f"theta={theta} outside [0, pi]")
        object.__setattr__(self, "s", min(max(s, 0.0), 1.0))
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi))
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    @classmethod
    def from_vector(cls, sx, sy, sz):
        s = math.sqrt(sx * sx + sy * sy + sz * sz)
        if s == 0.0:
            return cls(0.0, 0.0, 0.0)
        theta = math.acos(max(-1.0, min(1.0, sz / s)))
        phi = math.atan2(sy, sx)
        return cls(s, theta, phi)

    @property
    def sx(self):
        return self.s * math.sin(self.theta) * math.cos(self.phi)

    @property
    def sy(self):
        return self.s * math.sin(self.theta) * math.sin(self.phi)

    @property
    def sz(self):
        return self.s * math.cos(self.theta)

    @property
    def vector(self):
        return np.array([self.sx, self.sy, self.sz])

    @property
    def rho01(self):
        return 0.5 * complex(self.sx, -self.sy)

    def density_matrix(self):
        """2x2 matrix on (|eg>, |ge>)."""
        sx, sy, sz = self.sx, self.sy, self.sz
        return 0.5 * np.array([[1 + sz, sx - 1j * sy], [sx + 1j * sy, 1 - sz]])

    def embed(self):
        """4x4 two-qubit density matrix (|eg> is index 2, |ge> index 1)."""
        small = self.density_matrix()
        rho = np.zeros((4, 4), dtype=complex)
        idx = [2, 1]
        for a in range(2):
            for b in range(2):
                rho[idx[a], idx[b]] = small[a, b]
        return rho


@dataclass(frozen=True)
class WLikeState:
    """Canonical W-like state.

    ``c`` holds the sorted moduli c1 >= c2 >= c3 > 0; ``phases`` are the
    relative phases (phi2, phi3) of slots 2 and 3 with respect to slot 1;
    ``atoms[k]`` is the physical atom (0-based) that carries slot k.
    """

    c: tuple
    phases: tuple = (0.0, 0.0)
    atoms: tuple = (0, 1, 2)

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        if len(c) != 3:
            raise InvalidStateError("a W-like state has three amplitudes")
        if not all(math.isfinite(x) for x in c):
            raise InvalidStateError("amplitudes must be finite")
        if not (c[0] >= c[1] >= c[2]):
            raise InvalidStateError(f"amplitudes {c} are not sorted; use canonicalize()")
        if c[2] <= 0.0:
            raise InvalidStateError("c3 must be strictly positive (two-atom case otherwise)")
        norm2 = sum(x * x for x in c)
        if abs(norm2 - 1.0) > 1e-12:
            raise InvalidStateError(f"amplitudes not normalized: sum c^2 = {norm2}")
        if sorted(self.atoms) != [0, 1, 2]:
            raise InvalidStateError(f"atoms={self.atoms} is not a permutation of (0, 1, 2)")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "phases", tuple(float(wrap_phase(p)) for p in self.phases))
        object.__setattr__(self, "atoms", tuple(int(a) for a in self.atoms))

    @classmethod
    def from_amplitudes(cls, c1, c2, c3):
        """Canonical state from (possibly unnormalized, unsorted) real moduli."""
        return canonicalize([c1, c2, c3])[0]

    @property
    def c1(self):
        return self.c[0]

    @property
    def c2(self):
        return self.c[1]

    @property
    def c3(self):
        return self.c[2]

    @property
    def cbar(self):
        return sum(self.c) / 3.0

    @property
    def semi_perimeter(self):
        return sum(self.c) / 2.0

    @property
    def has_phases(self):
        return any(p != 0.0 for p in self.phases)

    def amplitudes(self):
        """Complex amplitudes in slot order."""
        p2, p3 = self.phases
        return np.array([self.c[0], self.c[1] * np.exp(1j * p2), self.c[2] * np.exp(1j * p3)])

    def physical_amplitudes(self):
        """Complex amplitudes indexed by physical atom."""
        out = np.empty(3, dtype=complex)
        out[list(self.atoms)] = self.amplitudes()
        return out

    def ket(self):
        """8-component state vector, atom 1 the most significant qubit."""
        psi = np.zeros(8, dtype=complex)
        psi[[4, 2, 1]] = self.physical_amplitudes()
        return psi

    def density_matrix(self):
        psi = self.ket()
        return np.outer(psi, psi.conj())


def canonicalize(amplitudes):
    """Sort three complex amplitudes by modulus and strip their phases.

    Returns ``(state, permutation, phases)`` where ``permutation[k]`` is the
    input index placed in slot k and ``phases`` are the slot-2 and slot-3
    phases relative to slot 1.
    """
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if a.size != 3:
        raise InvalidStateError("expected three amplitudes")
    if not np.all(np.isfinite(a)):
        raise InvalidStateError("amplitudes must be finite")
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        raise InvalidStateError("all-zero amplitudes")
    a = a / norm
    mod = np.abs(a)
    order = np.argsort(-mod, kind="stable")
    c = mod[order]
    if c[2] == 0.0:
        raise InvalidStateError("a zero amplitude reduces the problem to the two-atom case")
    c = c / math.sqrt(float(np.sum(c * c)))
    ref = np.angle(a[order[0]])
    phases = tuple(float(wrap_phase(np.angle(a[order[k]]) - ref)) for k in (1, 2))
    perm = tuple(int(i) for i in order)
    return WLikeState(tuple(c), phases, perm), perm, phases


def density_matrix(rho, tol=PSD_TOL):
    """Validate a density matrix and clip tiny negative eigenvalues.

    Accepts dimensions 2, 4 and 8. Raises InvalidStateError when the input is
    not Hermitian, not unit trace, or has eigenvalues below ``-tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4, 8):
        raise InvalidStateError(f"bad density-matrix shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise InvalidStateError(f"trace {np.trace(rho).real} != 1")
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    if w[0] < -tol:
        raise InvalidStateError(f"negative eigenvalue {w[0]}")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        rho = (v * w) @ v.conj().T
    return rho


# --- JSON records -----------------------------------------------------------

def state_to_record(state):
    if isinstance(state, TwoQubitBlochState):
        return {"type": "bloch", "s": state.s, "theta": state.theta, "phi": state.phi}
    if isinstance(state, WLikeState):
        amps = state.physical_amplitudes()
        return {
            "type": "wlike",
            "c": [float(x) for x in np.abs(amps)],
            "phases": [float(x) for x in np.angle(amps)],
        }
    raise TypeError(f"cannot serialize {type(state).__name__}")


def state_from_record(record):
    """Parse a ``{"type": "bloch"|"wlike", ...}`` mapping."""
    if not isinstance(record, dict) or "type" not in record:
        raise InvalidStateError("state record must be an object with a 'type' field")
    kind = record["type"]
    try:
        if kind == "bloch":
            return TwoQubitBlochState(float(record["s"]), float(record["theta"]), float(record.get("phi", 0.0)))
        if kind == "wlike":
            c = [float(x) for x in record["c"]]
            phases = [float(x) for x in record.get("phases", [])]
            if len(phases) == 2:
                phases = [0.0] + phases
            elif len(phases) == 0:
                phases = [0.0, 0.0, 0.0]
            if len(c) != 3 or len(phases) != 3:
                raise InvalidStateError("wlike record needs 3 amplitudes and 0, 2 or 3 phases")
            return canonicalize(np.array(c) * np.exp(1j * np.array(phases)))[0]
    except (KeyError, TypeError) as exc:
        raise InvalidStateError(f"malformed {kind} record: {exc}") from exc
    raise InvalidStateError(f"unknown state type {kind!r}")


def dumps_state(state):
    return json.dumps(state_to_record(state), sort_keys=True)


def loads_state(text):
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidStateError(f"state is not valid JSON: {exc}") from exc
    return state_from_record(record)


def load_state(path):
    return loads_state(Path(path).read_text(encoding="utf-8"))


W_STATE = WLikeState((1 / math.sqrt(3),) * 3)
