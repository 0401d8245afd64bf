import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fringent import DomainError, TwoQubitBlochState, W_STATE, WLikeState, canonicalize
from fringent.three_atom import (
    TriangleGeometry,
    eigenmodes_three,
    emission_spectrum_three,
    farfield_intensity,
    farfield_spectrum_three,
    fringe_extrema_three,
    spectral_weights_three,
    visibility_three,
    visibility_three_bruteforce,
)
from fringent.two_atom import emission_spectrum_two

modulus = st.floats(0.01, 1.0)
phase = st.floats(-math.pi, math.pi)


def random_directions(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def test_geometry():
    g = TriangleGeometry(2.0)
    x = g.positions
    for i in range(3):
        assert np.linalg.norm(x[i] - x[(i + 1) % 3]) == pytest.approx(2.0)
    assert np.allclose(x.sum(axis=0), 0)
    k = random_directions(np.random.default_rng(0), 5)
    th = g.phases(k)
    assert np.allclose(th.sum(axis=0), 0, atol=1e-12)
    kx = g.atom_phases(k)
    assert np.allclose(th[0], kx[1] - kx[2])
    with pytest.raises(DomainError):
        TriangleGeometry(0.0)


def test_eigenmodes_three():
    m = eigenmodes_three(4.0)
    assert m.gamma_plus + 2 * m.gamma_minus == pytest.approx(3.0)
    assert m.omega_plus == pytest.approx(2 * m.omega_minus)
    with pytest.raises(DomainError):
        eigenmodes_three(-1)


def test_farfield_limit_of_both_models():
    rng = np.random.default_rng(2)
    geom = TriangleGeometry(1e6)
    k = random_directions(rng, 50)
    s = WLikeState.from_amplitudes(0.8, 0.5, 0.3)
    ff = farfield_spectrum_three(s, geom, 0.0, k)
    assert np.allclose(emission_spectrum_three(s, geom, 0.0, k, model="lorentzian"), ff, rtol=1e-5, atol=1e-6)
    assert np.allclose(emission_spectrum_three(s, geom, 0.0, k, model="resolvent"), ff, rtol=1e-5, atol=1e-6)


def test_weights_of_symmetric_state():
    # the W state only feeds the superradiant line at zero phase difference
    geom = TriangleGeometry(3.0)
    dp, dm = spectral_weights_three(W_STATE, geom, (0.0, 0.0, 1.0))
    assert dm == pytest.approx(0.0, abs=1e-12)
    assert dp == pytest.approx(1.5, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(modulus, modulus, modulus, phase, phase, st.floats(0.5, 30))
def test_resolvent_is_nonnegative(a, b, c, p2, p3, u):
    s = canonicalize(np.array([a, b, c]) * np.exp(1j * np.array([0, p2, p3])))[0]
    k = random_directions(np.random.default_rng(3), 20)
    vals = emission_spectrum_three(s, TriangleGeometry(u), np.linspace(-3, 3, 20), k, model="resolvent")
    assert np.all(vals >= 0)


def test_phased_state_needs_resolvent():
    s = canonicalize([0.8, 0.5j, 0.3])[0]
    with pytest.raises(ValueError):
        spectral_weights_three(s, TriangleGeometry(2.0), (0, 0, 1))
    assert emission_spectrum_three(s, TriangleGeometry(2.0)) >= 0
    with pytest.raises(ValueError):
        emission_spectrum_three(s, TriangleGeometry(2.0), model="bogus")


def test_weak_third_atom_reduces_to_pair_in_far_field():
    eps = 1e-7
    s = WLikeState.from_amplitudes(0.8, 0.6, eps)
    u = 1e6
    geom = TriangleGeometry(u)
    k = random_directions(np.random.default_rng(4), 30)
    # slots 1 and 2 sit on physical atoms 0 and 1; their phase is k.(x0 - x1)
    kx = geom.atom_phases(k)
    chi = kx[0] - kx[1]
    pair = TwoQubitBlochState.from_vector(2 * 0.8 * 0.6, 0.0, 0.8**2 - 0.6**2)
    two = emission_spectrum_two(pair, u, 0.0, chi)
    three = emission_spectrum_three(s, geom, 0.0, k)
    # both are L(0) (1 + 2 c1 c2 cos chi)/2 in this limit, with different overall factors
    assert np.allclose(three / three.mean(), two / two.mean(), rtol=1e-4)


@settings(max_examples=40)
@given(modulus, modulus, modulus, phase, phase)
def test_torus_intensity_matches_bracket(a, b, c, p2, p3):
    amps = np.array(sorted([a, b, c], reverse=True)) * np.exp(1j * np.array([0, p2, p3]))
    s = canonicalize(amps)[0]
    if s.atoms != (0, 1, 2):
        return
    geom = TriangleGeometry(5.0)
    k = random_directions(np.random.default_rng(5), 16)
    th = geom.phases(k)
    bracket = farfield_spectrum_three(s, geom, 0.0, k) / 2.0
    assert np.allclose(farfield_intensity(s, th[0], th[1]), bracket, atol=1e-12)


@settings(max_examples=60)
@given(modulus, modulus, modulus, phase, phase)
def test_extrema_angles_attain_extrema(a, b, c, p2, p3):
    s = canonicalize(np.array([a, b, c]) * np.exp(1j * np.array([0, p2, p3])))[0]
    ex = fringe_extrema_three(s)
    t1, t2, t3 = ex.min_angles
    assert abs(math.remainder(t1 + t2 + t3, 2 * math.pi)) < 1e-9
    assert farfield_intensity(s, t1, t2) == pytest.approx(ex.imin, abs=1e-9)
    assert farfield_intensity(s, *ex.max_angles[:2]) == pytest.approx(ex.imax, abs=1e-9)
    assert ex.visibility == pytest.approx(visibility_three(s), abs=1e-12)


def test_intensity_never_negative():
    ex = fringe_extrema_three(W_STATE)
    assert farfield_intensity(W_STATE, *ex.min_angles[:2]) >= 0.0
    grid = np.linspace(-math.pi, math.pi, 101)
    assert farfield_intensity(W_STATE, grid[:, None], grid[None, :]).min() >= 0.0


def test_visibility_branches():
    assert visibility_three(W_STATE) == 1.0
    s = WLikeState.from_amplitudes(0.95, 0.25, 0.1)
    c1, c2, c3 = s.c
    imax, imin = (c1 + c2 + c3) ** 2, (c1 - c2 - c3) ** 2
    assert visibility_three(s) == pytest.approx((imax - imin) / (imax + imin))
    assert visibility_three_bruteforce(s) == pytest.approx(visibility_three(s), abs=1e-9)
    with pytest.raises(ValueError):
        visibility_three_bruteforce(s, n_grid=16)
