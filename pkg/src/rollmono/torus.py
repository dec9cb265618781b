"""Phase-space points on an invariant torus with prescribed integral values.

Given integral values (j1, j2, h), a point of the torus lying on the
Poincare section is built in two stages:

1. ``momentum_on_section``: for a fixed normal direction (gamma3, phi) the
   momentum M solves a 3x3 linear system -- the section condition
   d(gamma3)/dt = 0 plus the two linear integrals matched to (j1, j2).
2. ``state_on_torus``: the energy of that section state, as a function of
   gamma3, is the effective potential of the reduced motion; a bracketed
   root solve of energy(gamma3) = h pins the turning point.  The lower
   turning point (minimum of gamma3 over the torus) is the base point used
   by the monodromy computation.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import rough, smooth
from .core import BodyParams, BodyState, Model
from .errors import NoRoot, RootNotBracketed, SingularSystem

_E3 = np.array([0.0, 0.0, 1.0])


class Branch(enum.Enum):
    LOWER_TURNING = "lower"
    UPPER_TURNING = "upper"


@dataclass(frozen=True)
class IntegralPoint:
    """A point (j1, j2, h) in first-integral space.

    j1 is the area-type integral (smooth: p_psi; rough: c1), j2 the
    axial-type integral (smooth: p_phi; rough: c2), h the energy.
    """

    model: Model
    j1: float
    j2: float
    h: float


def field_fn(model: Model, params: BodyParams):
    """State -> (dM/dt, dgamma/dt) for the requested model."""
    mod = smooth if model is Model.SMOOTH else rough
    return lambda state: mod.field(state, params)


def gamma3_rate_fn(model: Model, params: BodyParams):
    """State -> d(gamma3)/dt, the section function of the requested model."""
    mod = smooth if model is Model.SMOOTH else rough
    return lambda state: mod.gamma3_rate(state, params)


def energy_of(model: Model, state: BodyState, params: BodyParams) -> float:
    mod = smooth if model is Model.SMOOTH else rough
    return mod.energy(state, params)


def integral_values(model: Model, state: BodyState, params: BodyParams,
                    tol: float = 1e-12):
    """Measured (j1, j2) of a state under the requested model."""
    if model is Model.SMOOTH:
        p_phi, p_psi = smooth.integrals(state)
        return p_psi, p_phi
    return rough.integrals(state, params, tol)


def _gamma_batch(g3s: np.ndarray, phi: float) -> np.ndarray:
    sin_theta = np.sqrt(1.0 - g3s * g3s)
    out = np.empty(g3s.shape + (3,))
    out[:, 0] = sin_theta * np.sin(phi)
    out[:, 1] = sin_theta * np.cos(phi)
    out[:, 2] = g3s
    return out


def _smooth_batch(g3s, phi, j1, j2, params: BodyParams):
    """Section states for the smooth model, vectorized over gamma3."""
    gammas = _gamma_batch(g3s, phi)
    n = g3s.size
    inertia = params.inertia
    Bg = gammas * params.semiaxes_sq
    h = np.sqrt(np.einsum("ni,ni->n", gammas, Bg))
    r = -Bg / h[:, None]
    a = np.cross(gammas, r)
    ia = a / inertia
    denom = 1.0 + params.m * np.einsum("ni,ni->n", a, ia)
    A = np.diag(1.0 / inertia)[None] - (params.m / denom)[:, None, None] * np.einsum(
        "ni,nj->nij", ia, ia
    )
    mid = np.diag(inertia)[None] + np.einsum("ni,nj->nij", a, a)
    P = A @ mid @ A

    rows = np.empty((n, 3, 3))
    rows[:, 0] = gammas[:, 0, None] * P[:, 1] - gammas[:, 1, None] * P[:, 0]
    rows[:, 1] = gammas
    rows[:, 2] = _E3
    rhs = np.empty((n, 3))
    rhs[:, 0] = 0.0
    rhs[:, 1] = j1
    rhs[:, 2] = j2

    Ms = _solve_rows(rows, rhs)
    w = np.einsum("nij,nj->ni", A, Ms)
    kin = 0.5 * np.einsum("ni,ni->n", inertia * w, w) + 0.5 * np.einsum(
        "ni,ni->n", a, w
    ) ** 2
    energies = kin + params.m * params.g * h
    return gammas, Ms, energies, rows, rhs


def _rough_batch(g3s, phi, j1, j2, params: BodyParams, g_eval=None):
    """Section states for the rolling model, vectorized over gamma3."""
    gammas = _gamma_batch(g3s, phi)
    n = g3s.size
    Bg = gammas * params.semiaxes_sq
    h = np.sqrt(np.einsum("ni,ni->n", gammas, Bg))
    r = -Bg / h[:, None]
    diag = params.inertia + params.m * np.einsum("ni,ni->n", r, r)[:, None]
    dr = r / diag
    denom = 1.0 - params.m * np.einsum("ni,ni->n", r, dr)
    Sinv = np.eye(3)[None] / diag[:, :, None] + (params.m / denom)[
        :, None, None
    ] * np.einsum("ni,nj->nij", dr, dr)

    rho = rough.measure_density(g3s, params)
    if g_eval is None:
        G = _direct_g_values(g3s, params)
    else:
        G = np.asarray(g_eval(g3s)).reshape(n, 2, 2)
    k_target = np.einsum("nij,j->ni", G, np.array([j1, j2]))

    rows = np.empty((n, 3, 3))
    rows[:, 0] = gammas[:, 0, None] * Sinv[:, 1] - gammas[:, 1, None] * Sinv[:, 0]
    rows[:, 1, 0] = gammas[:, 0]
    rows[:, 1, 1] = gammas[:, 1]
    rows[:, 1, 2] = (params.b3**2 / params.b1**2) * gammas[:, 2]
    rows[:, 2] = Sinv[:, 2] / rho[:, None]
    rhs = np.empty((n, 3))
    rhs[:, 0] = 0.0
    rhs[:, 1:] = k_target

    Ms = _solve_rows(rows, rhs)
    omega = np.einsum("nij,nj->ni", Sinv, Ms)
    energies = 0.5 * np.einsum("ni,ni->n", Ms, omega) + params.m * params.g * h
    return gammas, Ms, energies, rows, rhs


def _solve_rows(rows, rhs):
    """Batched 3x3 solve; singular slices yield NaN momenta."""
    try:
        return np.linalg.solve(rows, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(rhs.shape, np.nan)
        for i in range(rows.shape[0]):
            try:
                out[i] = np.linalg.solve(rows[i], rhs[i])
            except np.linalg.LinAlgError:
                pass
        return out


def _direct_g_values(g3s: np.ndarray, params: BodyParams, tol: float = 1e-12):
    """Fundamental matrices at the requested abscissae by direct sweeps."""
    out = np.empty((g3s.size, 2, 2))
    order = np.argsort(g3s)
    sorted_g3 = g3s[order]
    pos = sorted_g3 > 0.0
    neg = sorted_g3 < 0.0
    zero = ~pos & ~neg
    out_sorted = np.empty_like(out)
    if np.any(zero):
        out_sorted[zero] = np.eye(2)
    if np.any(pos):
        vals = sorted_g3[pos]
        out_sorted[pos] = rough._solve_fundamental(vals[-1], params, tol, t_eval=vals)
    if np.any(neg):
        vals = sorted_g3[neg]
        out_sorted[neg] = rough._solve_fundamental(vals[0], params, tol, t_eval=vals[::-1])[::-1]
    out[order] = out_sorted
    return out


def _batch(model, g3s, phi, j1, j2, params, g_eval):
    if model is Model.SMOOTH:
        return _smooth_batch(g3s, phi, j1, j2, params)
    return _rough_batch(g3s, phi, j1, j2, params, g_eval)


def momentum_on_section(model: Model, gamma3: float, phi: float, j1: float,
                        j2: float, params: BodyParams, g_eval=None) -> BodyState:
    """Momentum with d(gamma3)/dt = 0 and the linear integrals equal to (j1, j2).

    Raises SingularSystem when the defining 3x3 system is rank deficient.
    """
    if not -1.0 < gamma3 < 1.0:
        raise ValueError("gamma3 must lie in (-1, 1)")
    g3s = np.array([float(gamma3)])
    gammas, Ms, _, rows, rhs = _batch(model, g3s, phi, j1, j2, params, g_eval)
    M = Ms[0]
    if not np.all(np.isfinite(M)):
        raise SingularSystem(f"section system singular at gamma3={gamma3}")
    scale = 1.0 + np.abs(rhs[0]).max() + np.abs(rows[0]).max() * np.abs(M).max()
    if np.abs(rows[0] @ M - rhs[0]).max() > 1e-8 * scale:
        raise SingularSystem(f"section system ill-conditioned at gamma3={gamma3}")
    return BodyState(M, gammas[0])


# Scan grid: uniform bulk plus geometrically refined shells near the poles,
# where turning points accumulate for loops passing close to the vertical
# states.
_BULK_POINTS = 400
_EDGE_OFFSET = 1e-4
_EDGE_SHELLS_SMOOTH = (3e-5, 1e-5, 3e-6, 1e-6, 3e-7, 1e-7)
_EDGE_SHELLS_ROUGH = (3e-5, 1e-5, 3e-6, 1e-6)


def _scan_nodes(model: Model) -> np.ndarray:
    bulk = np.linspace(-1.0 + _EDGE_OFFSET, 1.0 - _EDGE_OFFSET, _BULK_POINTS)
    shells = _EDGE_SHELLS_SMOOTH if model is Model.SMOOTH else _EDGE_SHELLS_ROUGH
    lo = np.array([-1.0 + u for u in shells])
    hi = np.array([1.0 - u for u in shells])
    return np.sort(np.concatenate([lo, bulk, hi]))


def _brackets(nodes, f):
    finite = np.isfinite(f)
    out = []
    for i in range(nodes.size - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        if f[i] == 0.0:
            out.append((nodes[i], nodes[i]))
        elif f[i] * f[i + 1] < 0.0:
            out.append((nodes[i], nodes[i + 1]))
    return out


def state_on_torus(model: Model, point: IntegralPoint, branch: Branch, phi: float,
                   params: BodyParams, g_eval=None) -> BodyState:
    """Turning-point state on the torus of ``point``, at self-rotation ``phi``.

    LOWER_TURNING selects the smallest root of energy(gamma3) = h, i.e. the
    minimum of gamma3 over the torus.  Raises NoRoot when h is below the
    effective-potential minimum and RootNotBracketed when the scan finds no
    sign change.
    """
    j1, j2, h = point.j1, point.j2, point.h
    nodes = _scan_nodes(model)
    _, _, energies, _, _ = _batch(model, nodes, phi, j1, j2, params, g_eval)
    f = energies - h

    brackets = _brackets(nodes, f)
    # Zoom onto the scan minimum: wells narrower than the grid spacing
    # (tori close to a regular precession) are invisible to the bulk scan.
    for _ in range(8):
        if brackets:
            break
        finite = np.isfinite(f)
        if not np.any(finite) or np.any(f[finite] <= 0.0):
            break
        i_min = int(np.nanargmin(np.where(finite, f, np.inf)))
        lo = nodes[max(0, i_min - 1)]
        hi = nodes[min(nodes.size - 1, i_min + 1)]
        if hi - lo < 1e-13:
            break
        nodes = np.linspace(lo, hi, 41)
        f = _batch(model, nodes, phi, j1, j2, params, g_eval)[2] - h
        brackets = _brackets(nodes, f)
    if not brackets:
        finite = np.isfinite(f)
        if np.any(finite) and np.all(f[finite] > 0.0):
            raise NoRoot(
                f"energy {h} below the effective-potential minimum "
                f"{np.min(energies[np.isfinite(energies)]):.6g} for "
                f"(j1, j2)=({j1}, {j2})"
            )
        raise RootNotBracketed(
            f"no turning-point bracket for (j1, j2, h)=({j1}, {j2}, {h})"
        )

    def scalar_f(g3: float) -> float:
        arr = np.array([g3])
        return float(_batch(model, arr, phi, j1, j2, params, g_eval)[2][0] - h)

    roots = []
    for lo, hi in brackets:
        if lo == hi:
            roots.append(lo)
        else:
            roots.append(brentq(scalar_f, lo, hi, xtol=2e-16, rtol=8.9e-16))
    gamma3_star = min(roots) if branch is Branch.LOWER_TURNING else max(roots)
    return momentum_on_section(model, float(gamma3_star), phi, j1, j2, params, g_eval)
