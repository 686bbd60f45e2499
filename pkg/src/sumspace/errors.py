"""Exception types shared across the package.

The CLI maps ConfigError to exit code 2 and NumericalError (and subclasses)
to exit code 3; everything else is a bug.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (bad key, bad value, bad shape)."""


class NumericalError(RuntimeError):
    """A computation failed in a way the theory anticipates (rank loss, non-PSD Gram)."""


class SingularBlockError(NumericalError):
    """A Gram block is numerically singular."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class RankDeficiencyError(NumericalError):
    """A design block lost column rank; projections onto it are not defined."""


class NonConvergenceError(NumericalError):
    """Backfitting cannot converge; carries the empirical angle cosine."""

    def __init__(self, message, rho_hat=None):
        super().__init__(message)
        self.rho_hat = rho_hat


class GramError(NumericalError):
    """Population Gram inconsistent with the declared law/basis configuration."""
