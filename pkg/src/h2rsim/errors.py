"""Exception types shared across the package."""


class H2RSimError(Exception):
    """Base class for all package errors."""


class DegenerateFrame(H2RSimError):
    """Look-at construction failed: forward direction parallel to the up hint."""


class ZeroVector(H2RSimError):
    """An operation received a vector with (near-)zero norm."""


class ParseError(H2RSimError):
    """A scene, grasp, or config file could not be parsed."""


class EmptyCloud(H2RSimError):
    """A required point cloud contains no points."""


class NonFiniteCoordinate(H2RSimError):
    """A point cloud contains NaN or infinite coordinates."""


class NoSafeGrasp(H2RSimError):
    """Every grasp candidate was rejected by the safety filter."""


class SamplingExhausted(H2RSimError):
    """Rejection sampling hit its attempt budget before satisfying constraints."""


class ClearanceViolation(H2RSimError):
    """A trajectory waypoint would come closer than d_min to the hand/object."""


class StepBudgetExceeded(H2RSimError):
    """A trajectory cannot reach the pre-grasp pose within the step budget."""


class PolicyFailure(H2RSimError):
    """A policy raised during an episode; propagated to the caller."""


class NonFiniteAction(H2RSimError):
    """A policy emitted an action with NaN or infinite components."""
