"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class TrainingDivergedError(RuntimeError):
    """Surrogate training produced non-finite parameters."""


class SweepError(RuntimeError):
    """A sweep point failed; carries the confidence threshold that failed."""

    def __init__(self, threshold: float, message: str):
        super().__init__(f"sweep aborted at threshold {threshold:g}: {message}")
        self.threshold = threshold
