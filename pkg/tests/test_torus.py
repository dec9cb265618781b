import math

import numpy as np
import pytest

from rollmono import flow, monodromy, rough, smooth, torus
from rollmono.core import BodyState, Model, rotate_about_axis
from rollmono.errors import NoRoot
from rollmono.torus import Branch, IntegralPoint


def test_momentum_homogeneous_case(params):
    state = torus.momentum_on_section(Model.SMOOTH, 0.0, 0.0, 0.0, 0.0, params)
    np.testing.assert_allclose(state.M, 0.0, atol=1e-14)


def test_momentum_roundtrip_smooth(params, rng):
    for _ in range(8):
        g3 = rng.uniform(-0.9, 0.9)
        phi = rng.uniform(-math.pi, math.pi)
        j1, j2 = rng.uniform(-0.6, 0.6, 2)
        state = torus.momentum_on_section(Model.SMOOTH, g3, phi, j1, j2, params)
        v1, v2 = torus.integral_values(Model.SMOOTH, state, params)
        assert v1 == pytest.approx(j1, abs=1e-10)
        assert v2 == pytest.approx(j2, abs=1e-10)
        assert abs(smooth.gamma3_rate(state, params)) <= 1e-11


def test_momentum_roundtrip_rough(params, rng):
    for _ in range(5):
        g3 = rng.uniform(-0.9, 0.9)
        phi = rng.uniform(-math.pi, math.pi)
        j1, j2 = rng.uniform(-0.6, 0.6, 2)
        state = torus.momentum_on_section(Model.ROUGH, g3, phi, j1, j2, params)
        v1, v2 = torus.integral_values(Model.ROUGH, state, params)
        assert v1 == pytest.approx(j1, abs=1e-10)
        assert v2 == pytest.approx(j2, abs=1e-10)
        assert abs(rough.gamma3_rate(state, params)) <= 1e-11


def test_momentum_rough_at_equator_matches_k(params):
    # G(0) = Id, so the K targets are the integral values themselves
    state = torus.momentum_on_section(Model.ROUGH, 0.0, 0.3, 0.2, -0.4, params)
    np.testing.assert_allclose(rough.k_variables(state, params), [0.2, -0.4],
                               atol=1e-12)


def test_momentum_domain(params):
    with pytest.raises(ValueError):
        torus.momentum_on_section(Model.SMOOTH, 1.0, 0.0, 0.1, 0.1, params)


def test_symmetric_turning_points(params):
    # p_phi = p_psi = 0, h = m g b1 + 0.25: oracle is a brute-force scan of
    # the reduced energy, refined by the closed form 1 + 3 g3^2 = h^2.
    h = 1.25
    grid = np.linspace(-0.999, 0.999, 4001)
    vals = smooth.turning_energy(grid, 0.0, 0.0, params) - h
    sign_changes = grid[np.where(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]]
    assert len(sign_changes) == 2
    expected = math.sqrt((h * h - 1.0) / 3.0)
    point = IntegralPoint(Model.SMOOTH, 0.0, 0.0, h)
    lo = torus.state_on_torus(Model.SMOOTH, point, Branch.LOWER_TURNING, 0.0, params)
    hi = torus.state_on_torus(Model.SMOOTH, point, Branch.UPPER_TURNING, 0.0, params)
    assert lo.gamma[2] == pytest.approx(-expected, abs=1e-12)
    assert hi.gamma[2] == pytest.approx(expected, abs=1e-12)
    assert abs(sign_changes[0] - lo.gamma[2]) < 1e-3


def test_state_on_torus_roundtrip(params):
    point = IntegralPoint(Model.SMOOTH, 0.157, 0.207, 2.0082163333333333)
    state = torus.state_on_torus(Model.SMOOTH, point, Branch.LOWER_TURNING, 0.0,
                                 params)
    v1, v2 = torus.integral_values(Model.SMOOTH, state, params)
    assert v1 == pytest.approx(point.j1, abs=1e-10)
    assert v2 == pytest.approx(point.j2, abs=1e-10)
    assert smooth.energy(state, params) == pytest.approx(point.h, abs=1e-10)


def test_no_root_below_minimum(params):
    point = IntegralPoint(Model.SMOOTH, 0.0, 0.0, 0.5)  # below m g b1
    with pytest.raises(NoRoot):
        torus.state_on_torus(Model.SMOOTH, point, Branch.LOWER_TURNING, 0.0, params)


def test_phi_equivariance(params):
    point = IntegralPoint(Model.SMOOTH, 0.157, 0.207, 2.0082163333333333)
    base = torus.state_on_torus(Model.SMOOTH, point, Branch.LOWER_TURNING, 0.0,
                                params)
    shifted = torus.state_on_torus(Model.SMOOTH, point, Branch.LOWER_TURNING, 1.2,
                                   params)
    image = rotate_about_axis(base, 1.2)
    np.testing.assert_allclose(shifted.M, image.M, atol=1e-10)
    np.testing.assert_allclose(shifted.gamma, image.gamma, atol=1e-10)


def test_poincare_return_hits_same_turning_point(params):
    point = IntegralPoint(Model.SMOOTH, 0.157, 0.207, 2.0082163333333333)
    state = torus.state_on_torus(Model.SMOOTH, point, Branch.LOWER_TURNING, 0.0,
                                 params)
    event = flow.next_section_crossing(
        torus.field_fn(Model.SMOOTH, params), state,
        torus.gamma3_rate_fn(Model.SMOOTH, params), +1)
    assert event.state.gamma[2] == pytest.approx(state.gamma[2], abs=1e-8)
