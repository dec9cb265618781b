"""Winding of the Poincare map around the singular threads.

A loop is a circle in first-integral space lying in a plane where one of
the two linear integrals is held constant.  Every loop point is realized as
a turning-point state on its invariant torus; one application of the
Poincare return map advances the self-rotation angle by an increment
dphi(alpha).  As alpha runs once around the loop, dphi -- taken modulo
2*pi -- traces a closed curve on the transversal torus, and its integer
winding number k is the single unknown entry of the monodromy matrix.

The alpha grid is offset by half a step: when the loop crosses the planes
j1 = +-j2 the sampled torus passes exactly through a vertical state, where
the rotation increment is singular (a measure-zero set that the offset
avoids without affecting the winding).  Gaps of pi/2 or more between
consecutive increments trigger midpoint refinement.
"""
from __future__ import annotations

import enum
import math
import multiprocessing
import os
from dataclasses import dataclass

import numpy as np

from . import rough
from .core import BodyParams, BodyState, Model, euler_phi
from .errors import (
    LoopHitsSingularity,
    NoCrossingFound,
    NoRoot,
    RootNotBracketed,
    SingularSystem,
    StepSizeUnderflow,
    ToleranceNotMet,
    WindingAmbiguous,
)
from .flow import IntegratorConfig, next_section_crossing
from .torus import Branch, IntegralPoint, field_fn, gamma3_rate_fn, state_on_torus

TWO_PI = 2.0 * math.pi


class FixedAxis(enum.Enum):
    """Which linear integral the loop plane holds constant."""

    J1 = "j1"  # smooth: p_psi = const; rough: c1 = const
    J2 = "j2"  # smooth: p_phi = const; rough: c2 = const


@dataclass(frozen=True)
class Loop:
    """Circle of radius ``radius`` around ``(j_varying0, h0)`` in the loop plane."""

    model: Model
    fixed_axis: FixedAxis
    j_varying0: float
    j_fixed0: float
    h0: float
    radius: float
    n_samples: int

    def point(self, alpha: float) -> IntegralPoint:
        varying = self.j_varying0 + self.radius * math.sin(alpha)
        h = self.h0 + self.radius * math.cos(alpha)
        if self.fixed_axis is FixedAxis.J1:
            return IntegralPoint(self.model, self.j_fixed0, varying, h)
        return IntegralPoint(self.model, varying, self.j_fixed0, h)


def make_loop(model: Model, fixed_axis: FixedAxis, center, radius: float,
              n_samples: int = 128) -> Loop:
    """Validated loop around ``center = (j_varying0, j_fixed0, h0)``."""
    if radius <= 0.0:
        raise ValueError("loop radius must be positive")
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    j_varying0, j_fixed0, h0 = map(float, center)
    return Loop(model, fixed_axis, j_varying0, j_fixed0, h0, float(radius),
                int(n_samples))


@dataclass
class MonodromyResult:
    """Sampled map alpha -> dphi plus the extracted integer winding."""

    loop: Loop
    alphas: np.ndarray          # sample angles, increasing over one period
    dphi: np.ndarray            # continuous lift of the rotation increment
    image: np.ndarray           # rows (gamma1, gamma2, M3, M.gamma) at the return
    k: int
    closure_defect: float


def rotation_increment(model: Model, state: BodyState, params: BodyParams,
                       cfg: IntegratorConfig | None = None,
                       horizon: float = 500.0):
    """Self-rotation advance of one Poincare return from a turning-point state.

    Returns (dphi, return_state).  The state must sit on the section
    (gamma3' = 0) at a minimum of gamma3; the return uses the same crossing
    direction, so the increment measures the action of the return map along
    the symmetry cycle.
    """
    event = next_section_crossing(
        field_fn(model, params),
        state,
        gamma3_rate_fn(model, params),
        +1,
        cfg,
        horizon=horizon,
    )
    return event.phi_unwrapped - euler_phi(state.gamma), event.state


def thread_center(model: Model, fixed_axis: FixedAxis, plane_value: float,
                  pole: int, params: BodyParams):
    """Loop center (j_varying0, j_fixed0, h0) on the vertical-rotation thread.

    ``pole`` selects the family: +1 for the thread through gamma = (0,0,1),
    -1 for its mirror.  Both linear integrals are linear in the spin, so the
    thread point in the requested plane follows from one evaluation.
    """
    if pole not in (-1, 1):
        raise ValueError("pole must be +1 or -1")
    if model is Model.SMOOTH:
        # (j1, j2) = (p_psi, p_phi) = (pole * spin, spin)
        unit = np.array([float(pole), 1.0])
    else:
        state = BodyState(np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, float(pole)]))
        unit = np.array(rough.integrals(state, params, 1e-12))
    fixed_idx = 0 if fixed_axis is FixedAxis.J1 else 1
    spin = plane_value / unit[fixed_idx] if unit[fixed_idx] != 0.0 else 0.0
    j1, j2 = spin * unit
    h0 = params.m * params.g * params.b3 + spin**2 / (2.0 * params.I3)
    varying = j2 if fixed_axis is FixedAxis.J1 else j1
    return varying, plane_value, h0


def enclosing_center(model: Model, fixed_axis: FixedAxis, plane_value: float,
                     params: BodyParams, margin: float = 0.1):
    """Center and radius of a circle enclosing both threads in the plane."""
    v1, _, h1 = thread_center(model, fixed_axis, plane_value, +1, params)
    v2, _, h2 = thread_center(model, fixed_axis, plane_value, -1, params)
    center = (0.5 * (v1 + v2), plane_value, 0.5 * (h1 + h2))
    radius = 0.5 * math.hypot(v1 - v2, h1 - h2) + margin
    return center, radius


def _wrap(delta: float) -> float:
    return (delta + math.pi) % TWO_PI - math.pi


def _evaluate_sample(args):
    model, loop, alpha, params, cfg, horizon, base_phi = args
    point = loop.point(alpha)
    g_eval = rough.cached_table(params) if model is Model.ROUGH else None
    try:
        state = state_on_torus(model, point, Branch.LOWER_TURNING, base_phi, params, g_eval)
    except (NoRoot, RootNotBracketed, SingularSystem) as exc:
        raise LoopHitsSingularity(
            f"torus construction failed at alpha={alpha:.6f}: {exc}"
        ) from exc
    try:
        dphi, ret = rotation_increment(model, state, params, cfg, horizon)
    except (NoCrossingFound, StepSizeUnderflow, ToleranceNotMet) as exc:
        raise LoopHitsSingularity(
            f"Poincare return failed at alpha={alpha:.6f}: {exc}"
        ) from exc
    record = (ret.gamma[0], ret.gamma[1], ret.M[2], float(ret.M @ ret.gamma))
    return dphi, record


def _evaluate_many(model, loop, alphas, params, cfg, horizon, workers, base_phi):
    jobs = [(model, loop, float(a), params, cfg, horizon, base_phi) for a in alphas]
    if workers > 1 and len(jobs) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(min(workers, len(jobs))) as pool:
            return pool.map(_evaluate_sample, jobs, chunksize=1)
    return [_evaluate_sample(job) for job in jobs]


def default_workers() -> int:
    return max(1, int(os.environ.get("ROLLMONO_WORKERS", "1")))


def monodromy_index(model: Model, loop: Loop, params: BodyParams,
                    cfg: IntegratorConfig | None = None,
                    workers: int | None = None,
                    horizon: float = 500.0,
                    refine_budget: int | None = None,
                    base_phi: float = 0.0) -> MonodromyResult:
    """Winding number of the rotation increment around ``loop``.

    Samples dphi on a half-step-offset alpha grid, inserts midpoints until
    all consecutive (wrapped) gaps are below pi/2, lifts the sequence to a
    continuous function of alpha, and closes the cycle with an independent
    re-evaluation at alpha0 + 2*pi.  k is the rounded total winding; the
    closure defect reports how far the lift is from an exact multiple of
    2*pi.
    """
    workers = default_workers() if workers is None else workers
    budget = 3 * loop.n_samples if refine_budget is None else refine_budget
    step = TWO_PI / loop.n_samples
    alphas = [(i + 0.5) * step for i in range(loop.n_samples)]
    results = _evaluate_many(model, loop, alphas, params, cfg, horizon, workers, base_phi)
    values = [r[0] for r in results]
    records = [r[1] for r in results]

    while True:
        midpoints = []
        for i in range(len(alphas)):
            a_next = alphas[(i + 1) % len(alphas)] + (TWO_PI if i + 1 == len(alphas) else 0.0)
            v_next = values[(i + 1) % len(alphas)]
            if abs(_wrap(v_next - values[i])) >= 0.5 * math.pi:
                midpoints.append(0.5 * (alphas[i] + a_next))
        if not midpoints:
            break
        if len(midpoints) > budget:
            raise WindingAmbiguous(
                f"{len(midpoints)} gaps >= pi/2 left with refinement budget {budget}"
            )
        budget -= len(midpoints)
        new = _evaluate_many(model, loop, midpoints, params, cfg, horizon, workers, base_phi)
        for a, (v, rec) in zip(midpoints, new):
            a_mod = a % TWO_PI
            idx = int(np.searchsorted(alphas, a_mod))
            alphas.insert(idx, a_mod)
            values.insert(idx, v)
            records.insert(idx, rec)

    lift = [values[0]]
    for prev, curr in zip(values, values[1:]):
        lift.append(lift[-1] + _wrap(curr - prev))
    (v_close, _), = _evaluate_many(model, loop, [alphas[0] + TWO_PI], params, cfg,
                                   horizon, workers, base_phi)
    total = lift[-1] + _wrap(v_close - values[-1]) - lift[0]
    k = round(total / TWO_PI)
    defect = abs(total - TWO_PI * k)
    return MonodromyResult(
        loop=loop,
        alphas=np.array(alphas),
        dphi=np.array(lift),
        image=np.array(records),
        k=int(k),
        closure_defect=float(defect),
    )
