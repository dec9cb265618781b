"""High-accuracy integration of either model's field on the unit-sphere bundle.

The integrator is an adaptive explicit Runge-Kutta of order 8 with embedded
error estimate (DOP853), stepped manually so that

* gamma is renormalized to unit length after every accepted step (radial
  projection; M untouched), and
* the self-rotation angle is accumulated as an extra quadrature variable
  phi' = (gamma1' gamma2 - gamma1 gamma2') / (gamma1^2 + gamma2^2),
  which keeps phi continuous across arbitrarily fast rotation.

Section crossings are located by sign-bracketing on subsampled dense output
of each accepted step, followed by root refinement to |s| <= 1e-11.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .core import BodyState, Trajectory, euler_phi
from .errors import (
    NoCrossingFound,
    StepSizeUnderflow,
    ToleranceNotMet,
    VerticalStateError,
)

#: Crossings closer than this to the start time are treated as the departure
#: point and ignored.
EPS_GUARD = 1e-8

#: Dense-output subsamples per accepted step when scanning for crossings.
_SCAN_NODES = 8


@dataclass
class IntegratorConfig:
    """Tolerances and stepping policy of the adaptive integrator."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = math.inf
    renorm: bool = True

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            tol = getattr(self, name)
            if not 0.0 < tol <= 1e-2:
                raise ValueError(f"IntegratorConfig.{name} must lie in (0, 1e-2]")


@dataclass
class SectionEvent:
    """A refined section crossing."""

    t: float
    state: BodyState
    phi_unwrapped: float


def _flat_rhs(field, track_phi: bool):
    if track_phi:

        def rhs(t, y):
            M_dot, g_dot = field(BodyState(y[:3], y[3:6]))
            out = np.empty(7)
            out[:3] = M_dot
            out[3:6] = g_dot
            den = y[3] * y[3] + y[4] * y[4]
            out[6] = (g_dot[0] * y[4] - y[3] * g_dot[1]) / den
            return out

    else:

        def rhs(t, y):
            M_dot, g_dot = field(BodyState(y[:3], y[3:6]))
            out = np.empty(6)
            out[:3] = M_dot
            out[3:6] = g_dot
            return out

    return rhs


class _Stepper:
    """DOP853 stepped one accepted step at a time, with renormalization."""

    def __init__(self, field, state0: BodyState, t0: float, t_bound: float,
                 cfg: IntegratorConfig, track_phi: bool):
        norm0 = np.linalg.norm(state0.gamma)
        if abs(norm0 - 1.0) > 1e-9:
            raise ValueError("initial gamma must be a unit vector")
        y0 = np.concatenate([state0.M, state0.gamma / norm0])
        if track_phi:
            # start the quadrature at the chart angle so that phi_unwrapped
            # and euler_phi differ by full turns along the whole orbit
            y0 = np.append(y0, euler_phi(state0.gamma))
        self.cfg = cfg
        self.solver = DOP853(
            _flat_rhs(field, track_phi),
            t0,
            y0,
            t_bound,
            max_step=cfg.max_step,
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
        )

    @property
    def t(self):
        return self.solver.t

    @property
    def y(self):
        return self.solver.y

    @property
    def finished(self):
        return self.solver.status == "finished"

    def step(self):
        """Advance one accepted step; returns the dense interpolant for it."""
        solver = self.solver
        msg = solver.step()
        if solver.status == "failed":
            text = msg or "integration failed"
            if "step size" in text.lower():
                raise StepSizeUnderflow(text)
            raise ToleranceNotMet(text)
        dense = solver.dense_output()
        if self.cfg.renorm:
            solver.y[3:6] /= np.linalg.norm(solver.y[3:6])
            # keep the stored first stage consistent with the projected state
            solver.f = solver.fun(solver.t, solver.y)
        return dense


def integrate(field, state0: BodyState, t_span, cfg: IntegratorConfig | None = None,
              track_phi: bool = True) -> Trajectory:
    """Integrate ``field`` over ``t_span`` and sample at every accepted step.

    ``field`` maps a BodyState to (dM/dt, dgamma/dt).  The returned
    trajectory carries the accumulated self-rotation angle when
    ``track_phi`` is set.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    stepper = _Stepper(field, state0, t0, t1, cfg, track_phi)
    rows = [np.array(stepper.y)]
    ts = [t0]
    while not stepper.finished:
        stepper.step()
        ts.append(stepper.t)
        rows.append(np.array(stepper.y))
    data = np.vstack(rows)
    phi = data[:, 6] if track_phi else None
    return Trajectory(np.array(ts), data[:, :3], data[:, 3:6], phi)


def _section_at(section, dense, t):
    y = dense(t)
    return section(BodyState(y[:3], y[3:6]))


def _scan_interval(section, dense, t_lo, t_hi, direction):
    """First directed sign change of the section function on [t_lo, t_hi]."""
    ts = np.linspace(t_lo, t_hi, _SCAN_NODES)
    vals = [_section_at(section, dense, t) for t in ts]
    for i in range(len(ts) - 1):
        lo, hi = vals[i], vals[i + 1]
        if lo == 0.0:
            continue
        if lo * hi < 0.0 and math.copysign(1.0, hi - lo) == direction:
            return ts[i], ts[i + 1]
    return None


def next_section_crossing(field, state0: BodyState, section, direction: int,
                          cfg: IntegratorConfig | None = None,
                          horizon: float = 400.0,
                          track_phi: bool = True) -> SectionEvent:
    """Locate the first t > t0 where ``section`` vanishes with the given slope sign.

    ``section`` maps a BodyState to a scalar; ``direction`` is +1 or -1 and
    selects the sign of d(section)/dt at the crossing.  Crossings within
    EPS_GUARD of the start are attributed to the departure point and skipped.
    Raises NoCrossingFound once ``horizon`` time units have elapsed.
    """
    if direction not in (-1, 1):
        raise ValueError("direction must be +1 or -1")
    cfg = cfg or IntegratorConfig()
    t0 = 0.0
    if track_phi:
        try:
            euler_phi(state0.gamma)
        except VerticalStateError:
            track_phi = False  # no defined self-rotation from the symmetry axis
    stepper = _Stepper(field, state0, t0, t0 + horizon, cfg, track_phi)
    guard = t0 + EPS_GUARD
    while not stepper.finished:
        t_prev = stepper.t
        dense = stepper.step()
        lo = max(t_prev, guard)
        if stepper.t <= lo:
            continue
        bracket = _scan_interval(section, dense, lo, stepper.t, direction)
        if bracket is None:
            continue
        t_star = brentq(
            lambda t: _section_at(section, dense, t),
            bracket[0],
            bracket[1],
            xtol=1e-14,
            rtol=8.9e-16,
        )
        y_star = dense(t_star)
        gamma = y_star[3:6] / np.linalg.norm(y_star[3:6])
        state = BodyState(np.array(y_star[:3]), gamma)
        phi = float(y_star[6]) if track_phi else math.nan
        return SectionEvent(float(t_star), state, phi)
    raise NoCrossingFound(f"no section crossing within horizon {horizon}")
