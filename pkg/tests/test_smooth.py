import math

import numpy as np
import pytest

from conftest import random_state
from rollmono import smooth, torus
from rollmono.core import BodyParams, BodyState, Model, rotate_about_axis


def finite_difference_gradients(state, params, h=1e-6):
    """Test-only fallback for the analytic energy gradients."""
    grads = []
    for arr in (state.M, state.gamma):
        out = np.zeros(3)
        for i in range(3):
            step = h * max(1.0, abs(arr[i]))
            orig = arr[i]
            arr[i] = orig + step
            e_plus = smooth.energy(state, params)
            arr[i] = orig - step
            e_minus = smooth.energy(state, params)
            arr[i] = orig + 2 * step
            e_plus2 = smooth.energy(state, params)
            arr[i] = orig - 2 * step
            e_minus2 = smooth.energy(state, params)
            arr[i] = orig
            out[i] = (8 * (e_plus - e_minus) - (e_plus2 - e_minus2)) / (12 * step)
        grads.append(out)
    return grads


def test_contact_vector_axis_cases(params):
    np.testing.assert_allclose(
        smooth.contact_vector(np.array([0.0, 0.0, 1.0]), params),
        [0.0, 0.0, -params.b3],
        atol=1e-15,
    )
    np.testing.assert_allclose(
        smooth.contact_vector(np.array([1.0, 0.0, 0.0]), params),
        [-params.b1, 0.0, 0.0],
        atol=1e-15,
    )


def test_contact_vector_oblique(params):
    gamma = np.array([1.0, 0.0, 1.0]) / math.sqrt(2.0)
    # oracle: direct evaluation of r = -B gamma / sqrt((gamma, B gamma))
    B = np.diag([1.0, 1.0, 4.0])
    expected = -(B @ gamma) / math.sqrt(gamma @ B @ gamma)
    np.testing.assert_allclose(smooth.contact_vector(gamma, params), expected,
                               atol=1e-15)
    np.testing.assert_allclose(expected,
                               -np.array([1.0, 0.0, 4.0]) / math.sqrt(5.0),
                               atol=1e-15)


def test_contact_jacobian_matches_fd(params, rng):
    for _ in range(5):
        gamma = rng.normal(size=3)
        gamma /= np.linalg.norm(gamma)
        J = smooth.contact_jacobian(gamma, params)
        h = 1e-6
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd = (smooth.contact_vector(gamma + e, params)
                  - smooth.contact_vector(gamma - e, params)) / (2 * h)
            np.testing.assert_allclose(J[:, i], fd, atol=1e-8)


def test_energy_vertical_rotation(params):
    state = BodyState(np.array([0.0, 0.0, 0.157]), np.array([0.0, 0.0, 1.0]))
    assert smooth.energy(state, params) == pytest.approx(2.0082163333333333, abs=1e-15)


def test_energy_zero_momentum_equator(params):
    state = BodyState(np.zeros(3), np.array([1.0, 0.0, 0.0]))
    assert smooth.energy(state, params) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize(
    "p",
    [BodyParams(1.0, 1.5, 1.0, 2.0, 1.0, 1.0), BodyParams(1.1, 1.7, 0.8, 1.9, 2.3, 1.4)],
)
def test_gradients_match_finite_differences(p, rng):
    worst = 0.0
    for _ in range(10):
        state = random_state(rng)
        dM, dG = smooth.energy_gradients(state, p)
        fM, fG = finite_difference_gradients(state, p)
        worst = max(worst, np.abs(dM - fM).max(), np.abs(dG - fG).max())
    assert worst <= 1e-8


def test_field_vertical_rotation_is_equilibrium(params):
    state = BodyState(np.array([0.0, 0.0, 0.7]), np.array([0.0, 0.0, 1.0]))
    M_dot, g_dot = smooth.field(state, params)
    np.testing.assert_allclose(M_dot, 0.0, atol=1e-14)
    np.testing.assert_allclose(g_dot, 0.0, atol=1e-14)


def test_field_structure(params, rng):
    for _ in range(10):
        state = random_state(rng)
        M_dot, g_dot = smooth.field(state, params)
        assert abs(M_dot[2]) <= 1e-10                       # d/dt M3 = 0
        assert abs(state.gamma @ g_dot) <= 1e-12            # unit-sphere tangency
        # time reversal: M -> -M flips gamma' and keeps M'
        M_dot_r, g_dot_r = smooth.field(BodyState(-state.M, state.gamma), params)
        np.testing.assert_allclose(g_dot_r, -g_dot, atol=1e-12)
        np.testing.assert_allclose(M_dot_r, M_dot, atol=1e-12)
        # the section function is the gamma3 component of the field
        assert smooth.gamma3_rate(state, params) == pytest.approx(g_dot[2], abs=1e-14)


def test_integrals_examples():
    st = BodyState(np.array([0.0, 0.0, 0.157]), np.array([0.0, 0.0, 1.0]))
    assert smooth.integrals(st) == (0.157, 0.157)
    st = BodyState(np.array([1.0, 2.0, 3.0]), np.array([0.0, 0.0, 1.0]))
    assert smooth.integrals(st) == (3.0, 3.0)
    st = BodyState(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    assert smooth.integrals(st) == (0.0, 0.0)


def test_so2_invariance(params, rng):
    for _ in range(8):
        state = random_state(rng)
        angle = rng.uniform(-math.pi, math.pi)
        rotated = rotate_about_axis(state, angle)
        assert smooth.energy(rotated, params) == pytest.approx(
            smooth.energy(state, params), abs=1e-12
        )
        np.testing.assert_allclose(smooth.integrals(rotated),
                                   smooth.integrals(state), atol=1e-12)


def test_reduced_energy_potential_minimum(params):
    assert smooth.reduced_energy(1e-12, 0.0, 0.0, 0.0, params) == pytest.approx(
        1.0, abs=1e-10
    )


def test_reduced_energy_kinetic_coefficient(params):
    # h(g3, g3dot) - h(g3, 0) = (m(b1^2-b3^2)g3^2/(b1^2-(b1^2-b3^2)g3^2)
    #                            + I1/(1-g3^2)) g3dot^2 / 2
    g3, g3dot, p_phi, p_psi = 0.4, 0.25, 0.3, -0.2
    diff = smooth.reduced_energy(g3, g3dot, p_phi, p_psi, params) - smooth.reduced_energy(
        g3, 0.0, p_phi, p_psi, params
    )
    b1s, b3s = params.b1**2, params.b3**2
    coeff = params.m * (b1s - b3s) * g3**2 / (b1s - (b1s - b3s) * g3**2) + params.I1 / (
        1.0 - g3**2
    )
    assert diff == pytest.approx(0.5 * coeff * g3dot**2, abs=1e-14)


def test_reduced_energy_matches_full_energy_on_section(params, rng):
    for _ in range(6):
        g3 = rng.uniform(-0.85, 0.85)
        phi = rng.uniform(-math.pi, math.pi)
        j1, j2 = rng.uniform(-0.5, 0.5, 2)
        state = torus.momentum_on_section(Model.SMOOTH, g3, phi, j1, j2, params)
        assert smooth.reduced_energy(g3, 0.0, j2, j1, params) == pytest.approx(
            smooth.energy(state, params), abs=1e-10
        )
