"""Ellipsoid of revolution rolling without sliding on a rough plane.

The momentum equations close on (M, gamma) once the angular velocity is
recovered from M by inverting the contact-point inertia operator.  Besides
the energy, the flow preserves an invariant measure and two integrals that
are linear in M with non-algebraic coefficients: they are obtained from the
rotation-invariant variables (K1, K2), which satisfy a linear ODE in gamma3
whose fundamental matrix G (with G(0) = Id) has unit determinant, so that
C = G(gamma3)^(-1) K is constant along orbits.
"""
from __future__ import annotations

import functools

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .core import BodyParams, BodyState, Vec3
from .errors import ToleranceNotMet
from .smooth import contact_jacobian, contact_vector

#: gamma3 is clamped this far away from +-1 when evaluating the fundamental
#: matrix at the vertical states themselves.
ENDPOINT_MARGIN = 1e-9


def omega_matrix(gamma: Vec3, params: BodyParams) -> np.ndarray:
    """Inverse of the contact-point inertia operator I + m(|r|^2 Id - r r^T).

    Maps the angular momentum M to the angular velocity.  Assembled with the
    rank-one inversion formula; the operator is symmetric positive definite
    for any admissible parameters.
    """
    r = contact_vector(gamma, params)
    diag = params.inertia + params.m * (r @ r)
    dr = r / diag
    denom = 1.0 - params.m * (r @ dr)
    return np.diag(1.0 / diag) + (params.m / denom) * np.outer(dr, dr)


def omega_from_momentum(state: BodyState, params: BodyParams) -> Vec3:
    """Angular velocity solving M = I w + m r x (w x r)."""
    return omega_matrix(state.gamma, params) @ state.M


def field(state: BodyState, params: BodyParams):
    """Right-hand side (dM/dt, dgamma/dt) of the rolling equations.

    The moving-reference-point term carries a plus sign,
    dM/dt = M x w + m r' x (w x r) + m g r x gamma: with the minus sign the
    energy and the linear integrals are not conserved (checked numerically
    against all sign combinations).
    """
    M, gamma = state.M, state.gamma
    r = contact_vector(gamma, params)
    omega = omega_matrix(gamma, params) @ M
    gamma_dot = np.cross(gamma, omega)
    r_dot = contact_jacobian(gamma, params) @ gamma_dot
    M_dot = (
        np.cross(M, omega)
        + params.m * np.cross(r_dot, np.cross(omega, r))
        + params.m * params.g * np.cross(r, gamma)
    )
    return M_dot, gamma_dot


def gamma3_rate(state: BodyState, params: BodyParams) -> float:
    """d(gamma3)/dt along the rolling flow; the Poincare-section function."""
    omega = omega_matrix(state.gamma, params) @ state.M
    return state.gamma[0] * omega[1] - state.gamma[1] * omega[0]


def energy(state: BodyState, params: BodyParams) -> float:
    """Energy integral H = (M, w)/2 - m g (r, gamma)."""
    omega = omega_from_momentum(state, params)
    r = contact_vector(state.gamma, params)
    return 0.5 * (state.M @ omega) - params.m * params.g * (r @ state.gamma)


def measure_density(gamma, params: BodyParams):
    """Invariant measure density 1 / sqrt(I1 I3 + m (r, I r)).

    Accepts a BodyState, a unit 3-vector, or a (vectorizable) gamma3 value;
    the density depends on the normal only through gamma3.
    """
    if isinstance(gamma, BodyState):
        gamma = gamma.gamma
    g = np.asarray(gamma, dtype=float)
    if g.ndim == 1 and g.shape[0] == 3:
        r = contact_vector(g, params)
        quad = r @ (params.inertia * r)
    else:
        b1sq, b3sq = params.b1**2, params.b3**2
        g3sq = g * g
        quad = (params.I1 * b1sq**2 * (1.0 - g3sq) + params.I3 * b3sq**2 * g3sq) / (
            b1sq + (b3sq - b1sq) * g3sq
        )
    return 1.0 / np.sqrt(params.I1 * params.I3 + params.m * quad)


def k_variables(state: BodyState, params: BodyParams):
    """Rotation-invariant variables (K1, K2) = (M . shape-weighted gamma, w3/rho)."""
    rows = k_rows(state.gamma, params)
    k = rows @ state.M
    return float(k[0]), float(k[1])


def k_rows(gamma: Vec3, params: BodyParams) -> np.ndarray:
    """2x3 matrix of the linear functionals M -> (K1, K2)."""
    ratio = params.b3**2 / params.b1**2
    row1 = np.array([gamma[0], gamma[1], ratio * gamma[2]])
    row2 = omega_matrix(gamma, params)[2] / measure_density(gamma, params)
    return np.vstack([row1, row2])


def coefficient_matrix(gamma3, params: BodyParams) -> np.ndarray:
    """Coefficient matrix of the linear system K' = A(gamma3) K.

    Vectorized: for array input of shape (...,) the result has shape
    (..., 2, 2).  The matrix has zero trace, hence det G = 1.
    """
    g3 = np.asarray(gamma3, dtype=float)
    b1sq, b3sq = params.b1**2, params.b3**2
    rho = measure_density(g3, params)
    a12 = rho * params.I3 * (b3sq - b1sq) / b1sq
    a21 = (
        params.m
        * rho
        * params.b1**4
        * (b3sq - b1sq)
        * (1.0 - g3 * g3)
        / (b1sq + (b3sq - b1sq) * g3 * g3) ** 2
    )
    out = np.zeros(g3.shape + (2, 2))
    out[..., 0, 1] = a12
    out[..., 1, 0] = a21
    return out


class FundamentalMatrix:
    """Fundamental solution G(gamma3) of the K-system with G(0) = Id."""

    def __init__(self, gamma3: float, entries: np.ndarray):
        self.gamma3 = float(gamma3)
        self.entries = np.asarray(entries, dtype=float)

    @property
    def det_defect(self) -> float:
        return abs(float(np.linalg.det(self.entries)) - 1.0)


def _solve_fundamental(gamma3: float, params: BodyParams, tol: float, t_eval=None):
    """Integrate the K-system from 0 to gamma3 starting from the identity."""

    def rhs(g3, y):
        return (coefficient_matrix(g3, params) @ y.reshape(2, 2)).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, gamma3),
        np.eye(2).ravel(),
        method="DOP853",
        rtol=tol,
        atol=tol,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise ToleranceNotMet(f"fundamental-matrix solve failed: {sol.message}")
    return sol.y.reshape(2, 2, -1).transpose(2, 0, 1)


def fundamental_matrix(
    gamma3: float, params: BodyParams, tol: float = 1e-12
) -> FundamentalMatrix:
    """G(gamma3) by direct adaptive solve at local tolerance ``tol``."""
    if not -1.0 < gamma3 < 1.0:
        raise ValueError("gamma3 must lie in (-1, 1)")
    if gamma3 == 0.0:
        return FundamentalMatrix(0.0, np.eye(2))
    g = _solve_fundamental(gamma3, params, tol)[-1]
    return FundamentalMatrix(gamma3, g)


class FundamentalTable:
    """Cubic-spline table of G over [-(1 - edge), 1 - edge].

    Meant for root-finding sweeps and plotting; the interpolation error
    budget is 1e-8, validated against direct solves in the test suite.
    Immutable after construction and safe for concurrent reads.
    """

    def __init__(
        self,
        params: BodyParams,
        n_nodes: int = 513,
        edge: float = 1e-6,
        tol: float = 1e-10,
    ):
        if n_nodes % 2 == 0:
            n_nodes += 1  # keep gamma3 = 0 on the grid
        span = 1.0 - edge
        nodes = np.linspace(-span, span, n_nodes)
        mid = n_nodes // 2
        values = np.empty((n_nodes, 2, 2))
        values[mid] = np.eye(2)
        values[mid + 1 :] = _solve_fundamental(span, params, tol, t_eval=nodes[mid + 1 :])
        values[:mid] = _solve_fundamental(-span, params, tol, t_eval=nodes[mid - 1 :: -1])[
            ::-1
        ]
        self.lo, self.hi = -span, span
        self._spline = CubicSpline(nodes, values, axis=0)

    def __call__(self, gamma3):
        g3 = np.clip(np.asarray(gamma3, dtype=float), self.lo, self.hi)
        return self._spline(g3)


@functools.lru_cache(maxsize=8)
def cached_table(params: BodyParams) -> FundamentalTable:
    """Per-parameter fundamental-matrix table, built once and reused."""
    return FundamentalTable(params)


def integrals(state: BodyState, params: BodyParams, tol: float = 1e-12, g_eval=None):
    """Values (c1, c2) of the two linear integrals, via C = G(gamma3)^(-1) K.

    ``g_eval`` may supply a precomputed table; by default G is obtained by a
    direct solve at local tolerance ``tol``.  gamma3 is clamped slightly away
    from +-1, where the coefficient matrix is still finite.
    """
    g3 = float(np.clip(state.gamma[2], -1.0 + ENDPOINT_MARGIN, 1.0 - ENDPOINT_MARGIN))
    if g_eval is not None:
        g = np.asarray(g_eval(g3))
    else:
        g = fundamental_matrix(g3, params, tol).entries
    k1, k2 = k_variables(state, params)
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    c1 = (g[1, 1] * k1 - g[0, 1] * k2) / det
    c2 = (-g[1, 0] * k1 + g[0, 0] * k2) / det
    return float(c1), float(c2)
