"""Exception types shared across the toolkit."""


class AssumptionViolation(ValueError):
    """A noise matrix or prior does not satisfy a required assumption
    (strict diagonal dominance, strictly positive class prior)."""


class CapacityError(RuntimeError):
    """An exhaustive search was requested on a hypothesis space too large
    to enumerate."""


class TrainingDiverged(RuntimeError):
    """Training hit a non-finite loss.

    Carries the last checkpoint recorded before divergence (or None if
    the loss was non-finite before the first checkpoint).
    """

    def __init__(self, step, last_checkpoint=None):
        super().__init__(f"non-finite loss at step {step}")
        self.step = step
        self.last_checkpoint = last_checkpoint
