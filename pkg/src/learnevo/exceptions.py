"""Error types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain an operation accepts."""

    kind = "invalid-argument"


class ContractViolation(RuntimeError):
    """A caller broke a precondition the callee cannot repair (e.g. stale tape)."""

    kind = "contract-violation"


class DegenerateSelectionError(InvalidArgumentError):
    kind = "degenerate-selection"


class TrainingDivergence(RuntimeError):
    """Raised when the PPO loss or one of its components becomes non-finite."""

    kind = "training-divergence"

    def __init__(self, message, iteration=None, diagnostics=None):
        super().__init__(message)
        self.iteration = iteration
        self.diagnostics = dict(diagnostics or {})
