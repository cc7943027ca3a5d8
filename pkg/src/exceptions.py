from typing import Optional


class PlannerError(Exception):
    """Base class for every error raised by the planner"""


class InputError(PlannerError, ValueError):
    """Malformed or out-of-range user input"""


class GeometryError(InputError):
    """Degenerate great-circle geometry (coincident or antipodal points)"""


class EnvelopeError(InputError):
    """Flight envelope is empty or a performance law left its domain"""


class WindModelError(InputError):
    """Wind grid could not be fitted"""


class TranscriptionError(InputError):
    """Scenario and layout cannot be turned into a consistent NLP"""


class DynamicsError(InputError):
    """Equations of motion evaluated outside their domain"""


class SolverError(PlannerError):
    """NLP solve finished without an optimal status"""

    def __init__(self, message: str, solution: Optional[object] = None):
        super().__init__(message)
        self.solution = solution


class InvariantViolation(PlannerError):
    """Internal consistency check failed"""
