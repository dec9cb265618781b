import math

import numpy as np
import pytest

from conftest import random_state
from rollmono import flow, rough, smooth
from rollmono.core import BodyState, Model, rotate_about_axis


def test_omega_axis_case(params):
    state = BodyState(np.array([0.0, 0.0, 0.9]), np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(
        rough.omega_from_momentum(state, params), [0.0, 0.0, 0.9 / 1.5], atol=1e-15
    )


def test_omega_transverse_case(params):
    # r = (0,0,-2): transverse inertia about the contact point is I1 + m b3^2 = 5
    state = BodyState(np.array([0.8, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(
        rough.omega_from_momentum(state, params), [0.8 / 5.0, 0.0, 0.0], atol=1e-15
    )


def test_omega_roundtrip(params, rng):
    for _ in range(10):
        state = random_state(rng)
        omega = rough.omega_from_momentum(state, params)
        r = smooth.contact_vector(state.gamma, params)
        recon = params.inertia * omega + params.m * np.cross(r, np.cross(omega, r))
        np.testing.assert_allclose(recon, state.M, atol=1e-12)


def test_field_vertical_rotation_is_equilibrium(params):
    state = BodyState(np.array([0.0, 0.0, 1.3]), np.array([0.0, 0.0, 1.0]))
    M_dot, g_dot = rough.field(state, params)
    np.testing.assert_allclose(M_dot, 0.0, atol=1e-14)
    np.testing.assert_allclose(g_dot, 0.0, atol=1e-14)


def test_field_tangency_and_energy_rate(params, rng):
    h = 1e-6
    for _ in range(10):
        state = random_state(rng)
        M_dot, g_dot = rough.field(state, params)
        assert abs(state.gamma @ g_dot) <= 1e-12
        # (grad H, field) = 0 with a finite-difference gradient
        rate = 0.0
        for arr, vel in ((state.M, M_dot), (state.gamma, g_dot)):
            for i in range(3):
                step = h * max(1.0, abs(arr[i]))
                orig = arr[i]
                arr[i] = orig + step
                e_plus = rough.energy(state, params)
                arr[i] = orig - step
                e_minus = rough.energy(state, params)
                arr[i] = orig
                rate += (e_plus - e_minus) / (2 * step) * vel[i]
        assert abs(rate) <= 1e-10
        assert rough.gamma3_rate(state, params) == pytest.approx(g_dot[2], abs=1e-14)


def test_energy_examples(params):
    state = BodyState(np.array([0.0, 0.0, 0.9]), np.array([0.0, 0.0, 1.0]))
    assert rough.energy(state, params) == pytest.approx(0.81 / 3.0 + 2.0, abs=1e-15)
    state = BodyState(np.zeros(3), np.array([1.0, 0.0, 0.0]))
    assert rough.energy(state, params) == pytest.approx(1.0, abs=1e-15)


def test_measure_density_values(params, rng):
    np.testing.assert_allclose(
        rough.measure_density(np.array([0.0, 0.0, 1.0]), params),
        1.0 / math.sqrt(7.5), atol=1e-15,
    )
    np.testing.assert_allclose(
        rough.measure_density(np.array([0.0, 0.0, -1.0]), params),
        1.0 / math.sqrt(7.5), atol=1e-15,
    )
    np.testing.assert_allclose(
        rough.measure_density(np.array([1.0, 0.0, 0.0]), params),
        1.0 / math.sqrt(2.5), atol=1e-15,
    )
    for _ in range(10):
        gamma = rng.normal(size=3)
        gamma /= np.linalg.norm(gamma)
        rho = rough.measure_density(gamma, params)
        assert rho > 0.0
        # the state and gamma3-only forms agree with the full-vector form
        assert rough.measure_density(gamma[2], params) == pytest.approx(rho, abs=1e-14)
        state = BodyState(np.zeros(3), gamma)
        assert rough.measure_density(state, params) == pytest.approx(rho, abs=1e-15)


def test_k_variables_axis(params):
    state = BodyState(np.array([0.0, 0.0, 0.7]), np.array([0.0, 0.0, 1.0]))
    k1, k2 = rough.k_variables(state, params)
    assert k1 == pytest.approx(4.0 * 0.7, abs=1e-14)
    assert k2 == pytest.approx(0.7 / 1.5 * math.sqrt(7.5), abs=1e-14)


def test_k_variables_so2_and_closed_form(params, rng):
    for _ in range(8):
        state = random_state(rng)
        k = rough.k_variables(state, params)
        rotated = rotate_about_axis(state, rng.uniform(-math.pi, math.pi))
        np.testing.assert_allclose(rough.k_variables(rotated, params), k, atol=1e-12)
        # bracketed closed form for K2
        g3 = state.gamma[2]
        rho = rough.measure_density(state.gamma, params)
        b1s, b3s = params.b1**2, params.b3**2
        k2_closed = rho * (
            params.m * b1s * b3s * g3 / (b1s + (b3s - b1s) * g3 * g3) * k[0]
            + params.I1 * state.M[2]
        )
        assert k[1] == pytest.approx(k2_closed, abs=1e-10)


def test_fundamental_matrix_identity_at_zero(params):
    fm = rough.fundamental_matrix(0.0, params)
    assert np.array_equal(fm.entries, np.eye(2))


@pytest.mark.parametrize("g3", [0.1, -0.1, 0.5, -0.5, 0.9, -0.9, 0.999, -0.999])
def test_fundamental_matrix_unit_determinant(params, g3):
    assert rough.fundamental_matrix(g3, params, 1e-12).det_defect <= 1e-8


def test_fundamental_matrix_taylor(params):
    eps = 1e-4
    G = rough.fundamental_matrix(eps, params, 1e-12).entries
    A0 = rough.coefficient_matrix(0.0, params)
    assert np.abs(G - np.eye(2) - A0 * eps).max() <= 1e-7


def test_fundamental_matrix_domain(params):
    with pytest.raises(ValueError):
        rough.fundamental_matrix(1.0, params)


def test_fundamental_table_accuracy(params, rng):
    table = rough.FundamentalTable(params)
    worst = 0.0
    for g3 in rng.uniform(-0.999998, 0.999998, 40):
        direct = rough.fundamental_matrix(float(g3), params, 1e-12).entries
        worst = max(worst, np.abs(table(g3) - direct).max())
    assert worst <= 1e-8


def test_integrals_reduce_to_k_at_equator(params, rng):
    for _ in range(5):
        M = rng.uniform(-1, 1, 3)
        phi = rng.uniform(-math.pi, math.pi)
        gamma = np.array([math.sin(phi), math.cos(phi), 0.0])
        state = BodyState(M, gamma)
        np.testing.assert_allclose(
            rough.integrals(state, params, 1e-12),
            rough.k_variables(state, params),
            atol=1e-12,
        )


def test_integrals_conserved_along_flow(params, rng):
    state = random_state(rng)
    c0 = rough.integrals(state, params, 1e-12)
    traj = flow.integrate(lambda s: rough.field(s, params), state, (0.0, 30.0),
                          flow.IntegratorConfig(), track_phi=False)
    for i in np.linspace(0, len(traj) - 1, 7).astype(int):
        c = rough.integrals(traj.state(i), params, 1e-12)
        assert abs(c[0] - c0[0]) <= 1e-6
        assert abs(c[1] - c0[1]) <= 1e-6


def test_integrals_at_vertical_rotation(params):
    # the endpoint is evaluated at the clamped abscissa 1 - 1e-9
    state = BodyState(np.array([0.0, 0.0, 0.5]), np.array([0.0, 0.0, 1.0]))
    c = rough.integrals(state, params, 1e-12)
    G = rough.fundamental_matrix(1.0 - 1e-9, params, 1e-12).entries
    k = np.array(rough.k_variables(state, params))
    np.testing.assert_allclose(c, np.linalg.solve(G, k), atol=1e-10)
