"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid input: bad parameter value, malformed file, or malformed config."""


class InfeasibleError(RuntimeError):
    """An estimation LP has no feasible point, i.e. the observed statistics
    are mutually inconsistent under the photon-number model."""

    def __init__(self, message: str, constraints=None):
        super().__init__(message)
        self.constraints = constraints


class LpError(RuntimeError):
    """Internal solver defect (iteration cap hit, numerically unbounded)."""
