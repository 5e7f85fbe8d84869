from typing import Optional


class LabError(Exception):
    """Base class for every failure raised by the lab services"""


class ConfigError(LabError):
    """Run configuration failed validation; `keys` names the offending entries"""

    def __init__(self, message: str, keys: Optional[list] = None):
        super().__init__(message)
        self.keys = keys or []


class CutoffError(LabError, ValueError):
    """Mode index outside the cutoff, or two representations that do not match"""


class ConditionError(LabError, ValueError):
    """A physical precondition on the input state is not met"""


class LeakageError(LabError):
    """Projection back onto the mode band discarded more norm than allowed"""

    def __init__(self, leakage: float, threshold: float, detail: str = ""):
        message = f"leakage {leakage:.3e} exceeds budget {threshold:.1e}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
        self.leakage = leakage
        self.threshold = threshold


class IntegratorError(LabError):
    """Time stepping could not proceed (step bound violated or inner solve stalled)"""


class ToleranceError(LabError):
    """A verification measured a value outside its tolerance"""

    def __init__(self, name: str, measured: float, tolerance: float, detail: str = ""):
        message = f"{name}: measured {measured:.6e}, tolerance {tolerance:.1e}"
        if detail:
            message = f"{message} - {detail}"
        super().__init__(message)
        self.name = name
        self.measured = measured
        self.tolerance = tolerance
