"""Rolling ellipsoid of revolution: two integrable models and their monodromy.

The package covers the ellipsoid of revolution moving on a smooth plane
(a Hamiltonian system) and rolling without sliding on a rough plane (a
nonholonomic system): vector fields and first integrals, high-accuracy
integration with section events, bifurcation diagrams in integral space,
and the Poincare-map computation of the topological monodromy around the
vertical-rotation threads.
"""

from .core import (
    BodyParams,
    BodyState,
    DEFAULT_PARAMS,
    Model,
    Trajectory,
    euler_phi,
    gamma_from_angles,
)
from .flow import IntegratorConfig, SectionEvent, integrate, next_section_crossing
from .monodromy import (
    FixedAxis,
    Loop,
    MonodromyResult,
    enclosing_center,
    make_loop,
    monodromy_index,
    rotation_increment,
    thread_center,
)
from .torus import Branch, IntegralPoint, momentum_on_section, state_on_torus

__version__ = "0.1.0"

__all__ = [
    "BodyParams",
    "BodyState",
    "Branch",
    "DEFAULT_PARAMS",
    "FixedAxis",
    "IntegralPoint",
    "IntegratorConfig",
    "Loop",
    "Model",
    "MonodromyResult",
    "SectionEvent",
    "Trajectory",
    "enclosing_center",
    "euler_phi",
    "gamma_from_angles",
    "integrate",
    "make_loop",
    "momentum_on_section",
    "monodromy_index",
    "next_section_crossing",
    "rotation_increment",
    "state_on_torus",
    "thread_center",
    "__version__",
]
