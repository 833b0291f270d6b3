"""Exception hierarchy shared across the workbench."""


class LeeError(Exception):
    """Base class for all workbench errors."""


class EmptySetError(LeeError):
    """Requested sampling/enumeration domain is empty."""


class TooLargeError(LeeError):
    """Enumeration guard exceeded."""


class SingularSelectionError(LeeError):
    """Partial Gaussian elimination could not find unit pivots; retry with a
    fresh column permutation."""


class BudgetExhaustedError(LeeError):
    """Solver iteration budget ran out before a solution was found."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InfeasibleParamsError(LeeError):
    """Solver or cost-model parameters violate a feasibility constraint."""
