"""Exception types that callers are expected to branch on.

Plain ``ValueError`` is used for ordinary precondition violations (bad
shapes, out-of-domain scalars); the classes below mark conditions with a
documented recovery path or a dedicated CLI exit code.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


class DegenerateFitError(ValueError):
    """Singular normal equations in an unregularized least-squares fit.

    Callers may retry with a positive ridge term.
    """


class InsufficientDataError(ValueError):
    """Fewer samples than coefficients in a least-squares fit.

    The streaming weighting update treats this as "skip the update".
    """


class TrainingDivergenceError(RuntimeError):
    """Non-finite or exploding training loss (CLI exit code 3)."""


class SamplerDivergenceError(RuntimeError):
    """Non-finite state encountered during ODE integration."""


class DatasetGenerationError(RuntimeError):
    """Maze rollout generation exhausted its retry budget."""
