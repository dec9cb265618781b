"""Exception types shared across the package."""


class RollmonoError(Exception):
    """Base class for all rollmono errors."""


class VerticalStateError(RollmonoError, ValueError):
    """The self-rotation angle is undefined on the symmetry axis."""


class ToleranceNotMet(RollmonoError, RuntimeError):
    """An adaptive solver could not satisfy the requested local tolerance."""


class StepSizeUnderflow(RollmonoError, RuntimeError):
    """The integrator step size collapsed below machine spacing."""


class NoCrossingFound(RollmonoError, RuntimeError):
    """No section crossing inside the time horizon."""


class SingularSystem(RollmonoError, RuntimeError):
    """The linear system for the momentum on the section is rank deficient."""


class NoRoot(RollmonoError, RuntimeError):
    """The requested energy lies below the effective-potential minimum."""


class RootNotBracketed(RollmonoError, RuntimeError):
    """The turning-point scan failed to bracket a root."""


class LoopHitsSingularity(RollmonoError, RuntimeError):
    """Torus construction failed on a loop sample."""


class WindingAmbiguous(RollmonoError, RuntimeError):
    """Adaptive refinement could not bring all sample gaps below the bound."""
