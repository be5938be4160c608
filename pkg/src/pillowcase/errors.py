"""Exception types shared across the package."""


class PillowcaseError(Exception):
    """Base class for all package specific errors."""


class PointIsPuncture(PillowcaseError):
    """A geometric query landed on a puncture, where the metric is singular."""


class NotCylinderDecomposable(PillowcaseError):
    """Horizontal trajectories failed to close up within the step budget."""


class NotEmbedded(PillowcaseError):
    """A polyline representative is not embedded or is in degenerate position."""


class InvalidCurve(PillowcaseError):
    """Edge weights do not satisfy the matching conditions of a normal curve."""


class ShearIncommensurate(PillowcaseError):
    """The shear parameter is not resolved by the requested mesh spacing."""


class ClassUnreachable(PillowcaseError):
    """No cycle in the requested homotopy class exists in the mesh graph."""


class InfeasibleQP(PillowcaseError):
    """The quadratic program has no feasible point (should not happen)."""


class IterationBudgetExceeded(PillowcaseError):
    """The cutting-plane loop did not certify within its iteration budget."""


class ToleranceNotMet(PillowcaseError):
    """A refinement sweep ended before reaching the requested accuracy."""


class BudgetExceeded(PillowcaseError):
    """A certificate could not be decided within the refinement budget."""


class WitnessMismatch(PillowcaseError):
    """Two projective vectors are indexed by different witness sets."""


class AllEntriesZero(PillowcaseError):
    """Every requested coordinate vanishes; no projective point exists."""
