"""Ranges of W-like entanglement measures compatible with a given visibility.

Each bound function returns a :class:`BoundInterval`. With ``variant="derived"``
(the default) the mixedness and three-pi formulas are the ones that survive a
brute-force check over random states; ``variant="alternative"`` keeps a
second set of expressions for comparison (looser, or too tight). The two
agree at V = 1 and in the limit V -> 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .states import WLikeState
from .three_atom import visibility_three

MEASURES = ("mixedness", "geometric", "negativity_max", "three_pi")
ATTAINERS = ("w_state", "c2_eq_c3_family", "c3_to_zero_family", "c1_boundary_family", "none")
VARIANTS = ("derived", "alternative")


@dataclass(frozen=True)
class BoundInterval:
    measure: str
    visibility: float
    lower: float
    upper: float
    lower_closed: bool
    upper_closed: bool
    lower_attainer: str
    upper_attainer: str

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        if not (-1e-12 <= self.lower <= self.upper + 1e-12 and self.upper <= 1 + 1e-12):
            raise ValueError(f"inconsistent interval [{self.lower}, {self.upper}]")

    @property
    def upsilon(self):
        return upsilon(self.visibility)

    def contains(self, value, tol=1e-9):
        """Membership with ``tol`` of slack on each side."""
        return self.lower - tol <= value <= self.upper + tol


def upsilon(V):
    return math.sqrt(max(0.0, 1.0 - V * V))


def _check(V, variant="derived"):
    V = float(V)
    if not (0.0 <= V <= 1.0) or math.isnan(V):
        raise DomainError(f"visibility {V} outside [0, 1]")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    return V


def mixedness_bounds(V, variant="derived") -> BoundInterval:
    V = _check(V, variant)
    if V == 1.0:
        return BoundInterval("mixedness", V, 2 / 3, 8 / 9, True, True, "c1_boundary_family", "w_state")
    y = upsilon(V)
    d = (3 + y) ** 2
    if variant == "derived":
        lo, hi = 2 / 3 * (1 - y) * (9 + 7 * y) / d, 2 * V * V / 3
    else:
        lo, hi = 2 / 3 * (1 - 4 * y * (1 + y) / d), (1 + V * V) / 3
    return BoundInterval("mixedness", V, lo, hi, True, False, "c2_eq_c3_family", "c3_to_zero_family")


def geometric_bounds(V, variant="derived") -> BoundInterval:
    V = _check(V, variant)
    if V == 1.0:
        return BoundInterval("geometric", V, 1 / 3, 5 / 9, True, True, "c1_boundary_family", "w_state")
    y = upsilon(V)
    return BoundInterval("geometric", V, (1 - y) / (3 + y), (1 - y) / 2, True, False,
                         "c2_eq_c3_family", "c3_to_zero_family")


def negativity_bounds(V, variant="derived") -> BoundInterval:
    V = _check(V, variant)
    if V == 1.0:
        # the W state sits at the bottom; (1/sqrt2, 1/2, 1/2) reaches 1
        return BoundInterval("negativity_max", V, 2 * math.sqrt(2) / 3, 1.0, True, True,
                             "w_state", "c2_eq_c3_family")
    y = upsilon(V)
    q = (1 + 3 * y) / (3 + y)
    return BoundInterval("negativity_max", V, math.sqrt(max(0.0, 1 - q * q)), V, True, False,
                         "c2_eq_c3_family", "c3_to_zero_family")


def three_pi_max(y, variant="derived"):
    """Largest three-pi value on the V < 1 branch as a function of upsilon."""
    k = 15.0 if variant == "derived" else 5.0
    return 2 / (3 * (3 + y) ** 2) * (
        4 * (1 + y) * math.sqrt(5 + 6 * y + 5 * y * y)
        + (1 - y) * math.sqrt((1 - y) * (17 + k * y))
        - (9 + 14 * y + 9 * y * y)
    )


def three_pi_bounds(V, variant="derived") -> BoundInterval:
    V = _check(V, variant)
    if V == 1.0:
        return BoundInterval("three_pi", V, 0.0, 4 * (math.sqrt(5) - 1) / 9, False, True,
                             "c3_to_zero_family", "w_state")
    return BoundInterval("three_pi", V, 0.0, max(0.0, three_pi_max(upsilon(V), variant)), False, True,
                         "c3_to_zero_family", "c2_eq_c3_family")


BOUND_FUNCTIONS = {
    "mixedness": mixedness_bounds,
    "geometric": geometric_bounds,
    "negativity_max": negativity_bounds,
    "three_pi": three_pi_bounds,
}


def bounds(measure, V, variant="derived") -> BoundInterval:
    return BOUND_FUNCTIONS[measure](V, variant)


# --- states at prescribed visibility ------------------------------------------

def _family_visibility(c2, t):
    c1 = math.sqrt(max(0.0, 1.0 - c2 * c2 * (1 + t * t)))
    return 2 * c1 * c2 * (1 + t) / (1 + 2 * t * c2 * c2)


def state_at_visibility(V, ratio):
    """The W-like state with visibility ``V`` < 1 and c3/c2 = ``ratio``.

    Solves for c2 by bisection between 0 (V = 0) and the boundary
    c1 = c2 + c3 (V = 1).
    """
    V = float(V)
    t = float(ratio)
    if not 0.0 < V < 1.0:
        raise DomainError(f"the one-parameter family needs 0 < V < 1, got {V}")
    if not 0.0 < t <= 1.0:
        raise DomainError(f"ratio c3/c2 must lie in (0, 1], got {t}")
    lo, hi = 0.0, 1.0 / math.sqrt((1 + t) ** 2 + 1 + t * t)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _family_visibility(mid, t) < V:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    c2 = 0.5 * (lo + hi)
    c1 = math.sqrt(1.0 - c2 * c2 * (1 + t * t))
    return WLikeState((c1, c2, t * c2))


def c2_eq_c3_state(V):
    """Member of the c2 = c3 family with visibility V < 1 (closed form)."""
    y = upsilon(V)
    c2 = math.sqrt((1 - y) / (2 * (3 + y)))
    return WLikeState((math.sqrt(1 - 2 * c2 * c2), c2, c2))


def sample_states_at_visibility(V, n, seed=0, ratio=None, max_attempts=1000):
    """Deterministic list of ``n`` W-like states with visibility ``V``.

    For V < 1 the ratio c3/c2 is drawn uniformly from (0, 1] unless fixed by
    ``ratio``. For V = 1 states are drawn uniformly on the positive octant of
    the sphere and kept when c1 <= c2 + c3.
    """
    V = _check(V)
    if V == 0.0:
        raise DomainError("V = 0 has no W-like representative with c3 > 0")
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    out = []
    if V < 1.0:
        ts = np.full(n, float(ratio)) if ratio is not None else 1.0 - rng.random(n)
        for t in ts:
            st = state_at_visibility(V, t)
            for _ in range(max_attempts):
                if abs(visibility_three(st) - V) < 1e-10:
                    break
                st = state_at_visibility(V, 1.0 - rng.random())
            else:
                raise DomainError(f"could not hit visibility {V}")
            out.append(st)
        return out
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > max_attempts * max(n, 1):
            raise DomainError("rejection sampling for V = 1 exhausted its budget")
        c = np.sort(np.abs(rng.normal(size=3)))[::-1]
        c = c / np.linalg.norm(c)
        if c[2] > 0 and c[0] <= c[1] + c[2]:
            out.append(WLikeState(tuple(c)))
    return out
