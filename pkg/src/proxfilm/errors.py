"""Exception types shared across the solver suite."""


class NonZeroMean(ValueError):
    """Right-hand side violates the zero-mean compatibility condition."""


class NonPositiveCurvature(ValueError):
    """Shifted second derivative d2(w) + c0 is not strictly positive."""


class NonPositiveSlope(ValueError):
    """Slope field u must be strictly positive."""


class DomainViolation(ValueError):
    """State lies outside the domain of the driving functional."""


class NewtonDiverged(RuntimeError):
    """Inner Newton solve failed after all fallbacks and step reductions."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class SlopeDegenerate(RuntimeError):
    """Slope field dipped below the validity floor of the explicit engine."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class GridMismatch(ValueError):
    """Paired trajectories are not on matching n / 2n grids."""


class NoConvergence(RuntimeError):
    """Iterative oracle exhausted its iteration budget."""


class ConfigError(ValueError):
    """Run configuration is malformed or inconsistent."""
