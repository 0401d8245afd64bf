import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fringent import DomainError, TwoQubitBlochState
from fringent.two_atom import (
    deviation_max,
    design_row_two,
    eigenmodes_two,
    emission_spectrum_two,
    fringe_params_two,
    s0_visibility,
    spectral_weights_two,
    visibility_two,
    visibility_two_bruteforce,
)

states = st.builds(TwoQubitBlochState, st.floats(0, 1), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
seps = st.floats(0.2, 60)


def test_eigenmodes():
    m = eigenmodes_two(math.pi / 2)
    assert m.f == pytest.approx(2 / math.pi)
    assert m.g == pytest.approx(0.0, abs=1e-15)
    assert m.gamma_plus + m.gamma_minus == pytest.approx(2.0)
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(DomainError):
            eigenmodes_two(bad)


@settings(max_examples=50)
@given(states, seps, st.floats(-3, 3), st.floats(-10, 10))
def test_lorentzian_design_row_reproduces_spectrum(state, u, omega, chi):
    row = design_row_two(u, omega, chi, "lorentzian")
    vec = np.array([1.0, state.sx, state.sy, state.sz])
    assert row @ vec == pytest.approx(emission_spectrum_two(state, u, omega, chi), rel=1e-12, abs=1e-14)


@settings(max_examples=50)
@given(states, seps, st.floats(-5, 5), st.floats(-10, 10))
def test_resolvent_model_is_nonnegative(state, u, omega, chi):
    assert emission_spectrum_two(state, u, omega, chi, model="resolvent") >= -1e-14


def test_resolvent_matches_lorentzian_in_far_field():
    rng = np.random.default_rng(1)
    u = 1e5
    for _ in range(20):
        state = TwoQubitBlochState(rng.random(), math.pi * rng.random(), 2 * math.pi * rng.random())
        om, chi = rng.normal(), rng.uniform(-math.pi, math.pi)
        a = emission_spectrum_two(state, u, om, chi)
        b = emission_spectrum_two(state, u, om, chi, model="resolvent")
        assert a == pytest.approx(b, rel=1e-4, abs=1e-8)


def test_spectral_integral_matches_weights():
    # int L dω = 2π/Γ for each line, so the integrated spectrum is 2π(B+/Γ+ + B-/Γ-)
    state = TwoQubitBlochState(0.7, 1.1, 0.4)
    u, chi = 2.3, 0.8
    m = eigenmodes_two(u)
    bp, bm = spectral_weights_two(state, u, chi)
    val, _ = quad(lambda w: emission_spectrum_two(state, u, w, chi), -np.inf, np.inf, epsabs=1e-12)
    assert val == pytest.approx(2 * math.pi * (bp / m.gamma_plus + bm / m.gamma_minus), rel=1e-8)


def test_weights_average_over_phase():
    # averaged over chi the cross terms vanish and B+ + B- -> 1/2
    state = TwoQubitBlochState(0.9, 0.7, 2.0)
    chi = np.linspace(0, 2 * math.pi, 1000, endpoint=False)
    bp, bm = spectral_weights_two(state, 3.0, chi)
    assert np.mean(bp + bm) == pytest.approx(0.5, abs=1e-12)


def test_absolute_prefactor():
    state = TwoQubitBlochState(0.5, 1.0, 0.0)
    rel = emission_spectrum_two(state, 2.0, 0.3, 0.1)
    ab = emission_spectrum_two(state, 2.0, 0.3, 0.1, absolute=True, omega0=100.0)
    assert ab == pytest.approx(rel * 100.3 / ((2 * math.pi) ** 2 * 100.0**3))
    with pytest.raises(DomainError):
        emission_spectrum_two(state, 2.0, absolute=True)
    with pytest.raises(ValueError):
        emission_spectrum_two(state, 2.0, model="nope")


@settings(max_examples=40, deadline=None)
@given(states, st.floats(math.pi, 40), st.floats(-2, 2))
def test_fringe_profile_reproduces_spectrum(state, u, omega):
    p = fringe_params_two(state, u, omega, n_samples=33)
    direct = emission_spectrum_two(state, u, omega, p.chi)
    assert np.allclose(p.intensity, direct, rtol=1e-12, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(states, seps, st.floats(-2, 2))
def test_visibility_range_and_ordering(state, u, omega):
    vf = visibility_two(state, u, omega)
    vp = visibility_two(state, u, omega, mode="physical")
    assert -1e-12 <= vp <= vf + 1e-12
    assert vf <= 1 + 1e-12


@pytest.mark.parametrize("u", [0.4, 1.5, 3.0, 7.7])
def test_physical_visibility_matches_scan(u):
    state = TwoQubitBlochState(0.8, 1.2, 0.9)
    exact = visibility_two(state, u, 0.2, mode="physical")
    assert visibility_two_bruteforce(state, u, 0.2, mode="physical") == pytest.approx(exact, abs=1e-9)


def test_bruteforce_validation():
    state = TwoQubitBlochState(0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        visibility_two_bruteforce(state, 2.0, n_grid=10)
    with pytest.raises(ValueError):
        visibility_two(state, 2.0, mode="odd")


def test_pure_state_far_field_law():
    for theta in np.linspace(0.1, 3.0, 7):
        state = TwoQubitBlochState(1.0, theta, 1.3)
        assert visibility_two(state, 1e6) == pytest.approx(math.sin(theta), abs=2e-6)


def test_deviation_max_is_grid_consistent():
    r = deviation_max(0.6, 2.0)
    state = TwoQubitBlochState(0.6, r.theta_star, r.phi_star)
    assert r.max_dev == pytest.approx(abs(visibility_two(state, 2.0) - 0.6 * math.sin(r.theta_star)), abs=1e-12)
    coarse = deviation_max(0.6, 2.0, refine=False)
    assert coarse.max_dev <= r.max_dev + 1e-15
    assert deviation_max(0.0, 2.0).max_dev == pytest.approx(float(s0_visibility(2.0)), abs=1e-12)
    with pytest.raises(DomainError):
        deviation_max(1.5, 2.0)
