"""Bifurcation diagrams in first-integral space.

The critical set of the integral map consists of the regular precessions
(a surface over the (j1, j2) plane: stationary points of the effective
potential, i.e. of the section energy as a function of gamma3) and of the
two one-parameter families of vertical rotations, whose images are the
singular threads hanging above the surface.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import rough, smooth
from .core import BodyParams, BodyState, Model
from .errors import SingularSystem
from .torus import _batch

_SCAN_POINTS = 400
_SCAN_EDGE = 1e-4
_FD_STEP = 1e-5

#: Residual bound on the stationarity equation at every emitted sample.
RESIDUAL_BOUND = 1e-9


@dataclass
class VerticalCurve:
    """One family of vertical rotations: rows (spin, j1, j2, h)."""

    data: np.ndarray

    @property
    def spins(self):
        return self.data[:, 0]

    @property
    def h(self):
        return self.data[:, 3]


@dataclass
class BifurcationDiagram:
    """Surface samples (j1, j2, gamma3, h) plus the two singular curves."""

    model: Model
    surface: np.ndarray
    curves: tuple[VerticalCurve, VerticalCurve]


def _turning_energy_rough(gamma3, j1, j2, params, g_eval):
    g3 = np.atleast_1d(np.asarray(gamma3, dtype=float))
    energies = _batch(Model.ROUGH, g3, 0.0, j1, j2, params, g_eval)[2]
    return energies if np.ndim(gamma3) else float(energies[0])


def stationarity_residual(model: Model, j1: float, j2: float, gamma3,
                          params: BodyParams, g_eval=None):
    """d/d(gamma3) of the section energy; zero on the precession surface.

    Smooth model: analytic derivative.  Rolling model: five-point central
    differences of the reconstructed section energy at step 1e-5 (the
    closed-form reduced energy is not available here).
    """
    if model is Model.SMOOTH:
        return smooth.turning_energy_deriv(gamma3, j2, j1, params)
    g3 = np.asarray(gamma3, dtype=float)
    h = _FD_STEP
    e = [
        _turning_energy_rough(g3 + k * h, j1, j2, params, g_eval)
        for k in (-2, -1, 1, 2)
    ]
    return (e[0] - 8.0 * e[1] + 8.0 * e[2] - e[3]) / (12.0 * h)


def _section_energy(model: Model, j1: float, j2: float, gamma3, params, g_eval):
    if model is Model.SMOOTH:
        return smooth.turning_energy(gamma3, j2, j1, params)
    return _turning_energy_rough(gamma3, j1, j2, params, g_eval)


def precession_points(model: Model, j1: float, j2: float, params: BodyParams,
                      g_eval=None):
    """All (gamma3, h) with stationary section energy at the given (j1, j2).

    Roots are bracketed on a dense gamma3 scan and refined; duplicates
    closer than 1e-7 are merged.  The list may be empty.
    """
    if model is Model.ROUGH and g_eval is None:
        g_eval = rough.cached_table(params)
    margin = _SCAN_EDGE + (2.5 * _FD_STEP if model is Model.ROUGH else 0.0)
    nodes = np.linspace(-1.0 + margin, 1.0 - margin, _SCAN_POINTS)
    vals = np.asarray(stationarity_residual(model, j1, j2, nodes, params, g_eval))
    finite = np.isfinite(vals)

    def scalar(g3):
        return float(stationarity_residual(model, j1, j2, g3, params, g_eval))

    roots = []
    for i in range(nodes.size - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        if vals[i] == 0.0:
            roots.append(nodes[i])
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(brentq(scalar, nodes[i], nodes[i + 1], xtol=1e-13))
    merged = []
    for root in sorted(roots):
        if not merged or root - merged[-1] > 1e-7:
            merged.append(root)
    return [
        (float(g3), float(_section_energy(model, j1, j2, g3, params, g_eval)))
        for g3 in merged
    ]


def vertical_state(spin: float, pole: int) -> BodyState:
    """Vertical rotation about the symmetry axis: M = (0,0,spin), gamma = (0,0,pole)."""
    return BodyState(np.array([0.0, 0.0, float(spin)]), np.array([0.0, 0.0, float(pole)]))


def vertical_curves(model: Model, spin_range, n: int, params: BodyParams):
    """The two families of vertical rotations sampled over ``spin_range``.

    Returns (north, south) VerticalCurve objects with rows (spin, j1, j2, h);
    the rolling-model values are evaluated through the fundamental matrix at
    the clamped endpoints gamma3 = +-(1 - 1e-9).
    """
    if n < 2:
        raise ValueError("need at least two spin samples")
    spins = np.linspace(float(spin_range[0]), float(spin_range[1]), int(n))
    curves = []
    for pole in (+1, -1):
        rows = np.empty((spins.size, 4))
        rows[:, 0] = spins
        if model is Model.SMOOTH:
            rows[:, 1] = pole * spins  # p_psi
            rows[:, 2] = spins         # p_phi
            rows[:, 3] = params.m * params.g * params.b3 + spins**2 / (2.0 * params.I3)
        else:
            for i, s in enumerate(spins):
                state = vertical_state(s, pole)
                rows[i, 1:3] = rough.integrals(state, params, 1e-12)
                rows[i, 3] = rough.energy(state, params)
        curves.append(VerticalCurve(rows))
    return curves[0], curves[1]


def build_diagram(model: Model, j1_values, j2_values, spin_range, n_spin: int,
                  params: BodyParams) -> BifurcationDiagram:
    """Assemble surface samples over the (j1, j2) grid plus both singular curves."""
    j1_values = np.atleast_1d(np.asarray(j1_values, dtype=float))
    j2_values = np.atleast_1d(np.asarray(j2_values, dtype=float))
    if j1_values.size < 2 or j2_values.size < 2:
        raise ValueError("grid needs at least 2 points per axis")
    g_eval = rough.cached_table(params) if model is Model.ROUGH else None
    rows = []
    for j1 in j1_values:
        for j2 in j2_values:
            for g3, h in precession_points(model, j1, j2, params, g_eval):
                rows.append((j1, j2, g3, h))
    surface = np.array(rows) if rows else np.empty((0, 4))
    north, south = vertical_curves(model, spin_range, n_spin, params)
    return BifurcationDiagram(model, surface, (north, south))


@dataclass
class PlaneSlice:
    """Intersection of the diagram with a plane j_fixed = value."""

    model: Model
    fixed_is_j1: bool
    value: float
    surface: np.ndarray   # rows (j_varying, gamma3, h)
    threads: np.ndarray   # rows (j_varying, h)


def slice_plane(model: Model, fixed_is_j1: bool, value: float, sweep_values,
                params: BodyParams) -> PlaneSlice:
    """Diagram slice: surface branch plus the isolated thread points."""
    from .monodromy import FixedAxis, thread_center  # local import, no cycle at module load

    g_eval = rough.cached_table(params) if model is Model.ROUGH else None
    rows = []
    for j in np.asarray(sweep_values, dtype=float):
        j1, j2 = (value, j) if fixed_is_j1 else (j, value)
        try:
            pts = precession_points(model, j1, j2, params, g_eval)
        except SingularSystem:
            continue
        rows.extend((j, g3, h) for g3, h in pts)
    axis = FixedAxis.J1 if fixed_is_j1 else FixedAxis.J2
    threads = []
    for pole in (+1, -1):
        varying, _, h0 = thread_center(model, axis, value, pole, params)
        threads.append((varying, h0))
    return PlaneSlice(model, fixed_is_j1, value,
                      np.array(rows) if rows else np.empty((0, 3)),
                      np.array(threads))
