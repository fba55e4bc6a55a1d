"""Exception types shared across the package."""


class VqfError(Exception):
    """Base class for all vqfactor errors."""


class InvalidLengthsError(VqfError):
    """Supplied factor bit lengths violate the length invariants."""


class InfeasibleError(VqfError):
    """The clause system admits no solution under the given bit lengths.

    For a genuine odd biprime this signals wrong length guesses; for an
    arbitrary odd input it usually means the number is prime.
    """


class DimensionCapError(VqfError):
    """Requested register size exceeds the configured qubit cap."""


class InvalidNoiseError(VqfError):
    """Noise rate outside the valid range for the Pauli channel."""


class BudgetExhaustedError(VqfError):
    """Cost-evaluation budget ran out; carries the best point seen so far."""

    def __init__(self, message, best_params=None, best_cost=None, eval_count=0):
        super().__init__(message)
        self.best_params = best_params
        self.best_cost = best_cost
        self.eval_count = eval_count
