"""Ellipsoid of revolution sliding on a smooth plane.

The system is Hamiltonian with respect to the e(3) bracket on the variables
(M, gamma):

    dM/dt     = M x dH/dM + gamma x dH/dgamma,
    dgamma/dt = gamma x dH/dM,

with H quadratic in M.  The gradients of H are evaluated analytically so
that conservation is limited only by the integrator tolerance.
"""
from __future__ import annotations

import numpy as np

from .core import BodyParams, BodyState, Vec3


def contact_vector(gamma: Vec3, params: BodyParams) -> Vec3:
    """Vector from the contact point to the center of mass, in body axes."""
    Bg = params.semiaxes_sq * gamma
    return -Bg / np.sqrt(gamma @ Bg)


def contact_jacobian(gamma: Vec3, params: BodyParams) -> np.ndarray:
    """Analytic Jacobian d r / d gamma of the contact vector.

    Shared with the rolling model, where it supplies dr/dt = J . dgamma/dt.
    """
    Bsq = params.semiaxes_sq
    Bg = Bsq * gamma
    h = np.sqrt(gamma @ Bg)
    r = -Bg / h
    return (np.outer(r, r) - np.diag(Bsq)) / h


def _mobility(gamma: Vec3, params: BodyParams):
    """Geometry shared by the energy and its gradients.

    Returns (r, a, A) with a = gamma x r and A = (I + m a a^T)^(-1),
    the latter assembled by the rank-one inversion formula.
    """
    r = contact_vector(gamma, params)
    a = np.cross(gamma, r)
    inertia = params.inertia
    ia = a / inertia
    denom = 1.0 + params.m * (a @ ia)
    A = np.diag(1.0 / inertia) - (params.m / denom) * np.outer(ia, ia)
    return r, a, A


def energy(state: BodyState, params: BodyParams) -> float:
    """Total energy H = (I A M, A M)/2 + (a, A M)^2/2 - m g (r, gamma)."""
    r, a, A = _mobility(state.gamma, params)
    w = A @ state.M
    kin = 0.5 * (params.inertia * w) @ w + 0.5 * (a @ w) ** 2
    return kin - params.m * params.g * (r @ state.gamma)


def energy_gradients(state: BodyState, params: BodyParams):
    """Analytic (dH/dM, dH/dgamma).

    dH/dM is linear in M.  dH/dgamma collects the dependence through
    a(gamma), A(gamma) and the potential, using the contact Jacobian.
    """
    M, gamma = state.M, state.gamma
    m, g = params.m, params.g
    inertia = params.inertia
    r, a, A = _mobility(gamma, params)

    w = A @ M
    s = a @ w
    u = A @ (inertia * w)
    v = A @ a
    dH_dM = u + s * v

    # dH/da for H = (I w, w)/2 + s^2/2 with w = A(gamma) M
    q = -m * s * u - m * (a @ u) * w - m * s * s * v - m * s * (a @ v) * w + s * w

    J = contact_jacobian(gamma, params)
    # a = gamma x r(gamma): pull q back through the chain rule, then add the
    # potential gradient m g B gamma / h = -m g r.
    dH_dgamma = np.cross(r, q) - J @ np.cross(gamma, q) - m * g * r
    return dH_dM, dH_dgamma


def field(state: BodyState, params: BodyParams):
    """Right-hand side (dM/dt, dgamma/dt) of the smooth-plane equations."""
    dH_dM, dH_dgamma = energy_gradients(state, params)
    gamma_dot = np.cross(state.gamma, dH_dM)
    M_dot = np.cross(state.M, dH_dM) + np.cross(state.gamma, dH_dgamma)
    return M_dot, gamma_dot


def momentum_matrix(gamma: Vec3, params: BodyParams) -> np.ndarray:
    """Matrix P with dH/dM = P M (used for the section condition)."""
    _, a, A = _mobility(gamma, params)
    return A @ (np.diag(params.inertia) + np.outer(a, a)) @ A


def gamma3_rate(state: BodyState, params: BodyParams) -> float:
    """d(gamma3)/dt along the smooth flow; the Poincare-section function."""
    dH_dM = momentum_matrix(state.gamma, params) @ state.M
    return state.gamma[0] * dH_dM[1] - state.gamma[1] * dH_dM[0]


def integrals(state: BodyState):
    """Values (p_phi, p_psi) of the axial momentum M3 and the area integral (M, gamma)."""
    return float(state.M[2]), float(state.M @ state.gamma)


def turning_energy(gamma3, p_phi: float, p_psi: float, params: BodyParams):
    """Reduced energy on the section gamma3' = 0, vectorized over gamma3."""
    g3 = np.asarray(gamma3, dtype=float)
    ell = np.sqrt(params.b1**2 - (params.b1**2 - params.b3**2) * g3 * g3)
    prec = (p_psi - p_phi * g3) ** 2 / (2.0 * params.I1 * (1.0 - g3 * g3))
    return prec + p_phi**2 / (2.0 * params.I3) + params.m * params.g * ell


def turning_energy_deriv(gamma3, p_phi: float, p_psi: float, params: BodyParams):
    """d/d(gamma3) of `turning_energy`, vectorized over gamma3."""
    g3 = np.asarray(gamma3, dtype=float)
    one = 1.0 - g3 * g3
    ell = np.sqrt(params.b1**2 - (params.b1**2 - params.b3**2) * g3 * g3)
    prec = (p_psi - p_phi * g3) * (p_psi * g3 - p_phi) / (params.I1 * one * one)
    grav = params.m * params.g * (params.b3**2 - params.b1**2) * g3 / ell
    return prec + grav


def reduced_energy(
    gamma3: float, gamma3_dot: float, p_phi: float, p_psi: float, params: BodyParams
) -> float:
    """Energy in the reduced variables (gamma3, gamma3', p_phi, p_psi)."""
    b1sq, b3sq = params.b1**2, params.b3**2
    kin_coeff = (
        params.m * (b1sq - b3sq) * gamma3**2 / (b1sq - (b1sq - b3sq) * gamma3**2)
        + params.I1 / (1.0 - gamma3**2)
    )
    return 0.5 * kin_coeff * gamma3_dot**2 + float(
        turning_energy(gamma3, p_phi, p_psi, params)
    )
