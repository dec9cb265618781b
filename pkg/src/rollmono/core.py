"""Shared value types and the angle chart on the unit sphere.

The state of the rolling body is the pair (M, gamma): angular momentum about
the contact point and the unit normal of the supporting plane, both in body
axes.  The phase space is the five-dimensional manifold {gamma^2 = 1}.

The angle chart is fixed once for the whole package:

    gamma = (sin(theta) sin(phi), sin(theta) cos(phi), cos(theta))

so that ``phi`` is the self-rotation angle used as a coordinate on the
transversal torus of the monodromy computation, and gamma3 = cos(theta).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import VerticalStateError

Vec3 = np.ndarray


class Model(enum.Enum):
    """Which of the two rolling problems an operation refers to."""

    SMOOTH = "smooth"
    ROUGH = "rough"


@dataclass(frozen=True)
class BodyParams:
    """Mass geometry of the axisymmetric ellipsoid.

    I1, I3   transverse and axial central moments of inertia
    b1, b3   equatorial and symmetry-axis semi-axes
    m, g     mass and free-fall acceleration
    """

    I1: float
    I3: float
    b1: float
    b3: float
    m: float
    g: float

    def __post_init__(self):
        for name in ("I1", "I3", "b1", "b3", "m", "g"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"BodyParams.{name} must be strictly positive")

    @property
    def inertia(self) -> Vec3:
        """Diagonal of the inertia tensor."""
        return np.array([self.I1, self.I1, self.I3])

    @property
    def semiaxes_sq(self) -> Vec3:
        """Diagonal of the shape matrix diag(b1^2, b1^2, b3^2)."""
        return np.array([self.b1**2, self.b1**2, self.b3**2])


#: Parameter set used by all reference computations: a prolate ellipsoid
#: with unit mass and gravity.
DEFAULT_PARAMS = BodyParams(I1=1.0, I3=1.5, b1=1.0, b3=2.0, m=1.0, g=1.0)


@dataclass
class BodyState:
    """Phase point (M, gamma) in body axes."""

    M: Vec3
    gamma: Vec3

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)

    def copy(self) -> "BodyState":
        return BodyState(self.M.copy(), self.gamma.copy())

    def flat(self) -> np.ndarray:
        return np.concatenate([self.M, self.gamma])

    @classmethod
    def from_flat(cls, y: np.ndarray) -> "BodyState":
        return cls(np.array(y[:3]), np.array(y[3:6]))


@dataclass
class Trajectory:
    """Time-ordered samples of an integrated orbit.

    ``phi`` is the continuous self-rotation angle accumulated by quadrature;
    it is NaN-filled when the integration did not track it.
    """

    t: np.ndarray
    M: np.ndarray
    gamma: np.ndarray
    phi: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.M = np.asarray(self.M, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        if self.phi is None:
            self.phi = np.full(self.t.shape, np.nan)
        else:
            self.phi = np.asarray(self.phi, dtype=float)
        if self.t.ndim != 1 or np.any(np.diff(self.t) <= 0.0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return self.t.size

    def state(self, i: int) -> BodyState:
        return BodyState(self.M[i].copy(), self.gamma[i].copy())


def gamma_from_angles(theta: float, phi: float) -> Vec3:
    """Unit normal for nutation angle theta in (0, pi) and self-rotation phi."""
    s = math.sin(theta)
    return np.array([s * math.sin(phi), s * math.cos(phi), math.cos(theta)])


def euler_phi(gamma: Vec3) -> float:
    """Self-rotation angle phi = atan2(gamma1, gamma2) in (-pi, pi].

    Raises VerticalStateError when gamma is (numerically) on the symmetry
    axis, where the angle is undefined.
    """
    g1, g2 = float(gamma[0]), float(gamma[1])
    if g1 * g1 + g2 * g2 < 1e-20:
        raise VerticalStateError("self-rotation angle undefined on the symmetry axis")
    phi = math.atan2(g1, g2)
    if phi <= -math.pi:
        phi += 2.0 * math.pi
    return phi


def self_rotation_rate(gamma: Vec3, gamma_dot: Vec3) -> float:
    """Instantaneous rate of the self-rotation angle, d(phi)/dt.

    Quadrature integrand used to accumulate a continuous phi along orbits;
    singular where gamma1^2 + gamma2^2 vanishes.
    """
    den = gamma[0] * gamma[0] + gamma[1] * gamma[1]
    return (gamma_dot[0] * gamma[1] - gamma[0] * gamma_dot[1]) / den


def rotate_about_axis(state: BodyState, angle: float) -> BodyState:
    """Apply the symmetry rotation that shifts the self-rotation angle by +angle."""
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    return BodyState(rot @ state.M, rot @ state.gamma)
