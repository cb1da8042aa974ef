"""Exception hierarchy shared by all modules.

The CLI maps these onto its exit-code scheme: PreconditionError -> 3,
BudgetError (and subclasses) -> 4, config problems -> 2.
"""


class AffineWalkError(Exception):
    """Base class for all package errors."""


class PreconditionError(AffineWalkError):
    """A mathematical precondition is violated (singular matrix,
    inadmissible (T, p) pair, composite modulus where a prime is required)."""


class DegeneratePrimeError(PreconditionError):
    """The eigenvalue-1 nullspace mod p is empty: p divides a resultant
    that is nonzero generically, so this prime cannot carry the projection."""


class BudgetError(AffineWalkError):
    """A configured resource cap (dense states, characters, search length)
    would be exceeded."""


class NotMixedError(BudgetError):
    """Mixing-time search reached its cap before the threshold was met."""

    def __init__(self, n_cap: int, method: str, last_value: float):
        self.n_cap = n_cap
        self.method = method
        self.last_value = last_value
        super().__init__(
            f"not mixed by n_max={n_cap} (method={method}, value={last_value:.6g})"
        )


class RootConvergenceError(AffineWalkError):
    """Polynomial root refinement failed to certify residuals even after
    raising the working precision."""
