"""Exception types shared across the planner modules."""


class PlannerError(Exception):
    """Base class for all flatplan errors."""


class ParameterOutOfRangeError(PlannerError):
    """Curve parameter outside the half-open knot interval."""


class UnsupportedOrderError(PlannerError):
    """Requested derivative or basis order exceeds the spline degree."""


class SingularFlatMapError(PlannerError):
    """Raw flat map evaluated at zero speed."""


class DegeneratePathError(PlannerError):
    """Path tangent vanished where a direction is required."""


class ParameterizationRangeError(PlannerError):
    """Speed profile value left the unit interval."""


class DegenerateScenarioError(PlannerError):
    """Scenario data does not determine the relaxation heuristics."""


class MissingCertificateError(PlannerError):
    """Path solution lacks the derivative-bound certificates."""


class CertificateViolationError(PlannerError):
    """Returned solution fails its own certificate conditions (backend bug)."""


class StalledTrajectoryError(PlannerError):
    """Recovered speed vanished on an interior segment; duration undefined."""


class ScenarioSchemaError(PlannerError):
    """Scenario file is missing keys, has wrong types, or invalid values."""


class StageInfeasibleError(PlannerError):
    """One of the conic stages is infeasible."""

    def __init__(self, stage: str, message: str = ""):
        self.stage = stage
        super().__init__(f"{stage} infeasible" + (f": {message}" if message else ""))


class SolverNumericalError(PlannerError):
    """Backend reported a numerical failure."""

    def __init__(self, stage: str = "", message: str = ""):
        self.stage = stage
        super().__init__(message or (f"{stage} numerical failure" if stage else "numerical failure"))
