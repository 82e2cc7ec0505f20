"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration / validation problems
exit with 2, numerical failures with 3, I/O failures with 4.
"""


class NnmlabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(NnmlabError, ValueError):
    """Bad argument: wrong shape, non-positive geometry, constrained node, ..."""


class ModelError(NnmlabError):
    """Structurally broken model (e.g. mass matrix not positive definite)."""


class NumericalError(NnmlabError):
    """Base for runtime numerical failures (exit code 3)."""


class IntegrationError(NumericalError):
    """Newton iteration failed to converge during time stepping."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DivergenceError(NumericalError):
    """Non-finite state detected during time stepping."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class TrainingError(NumericalError):
    """Non-finite loss or gradients during optimisation."""


class SweepError(NumericalError):
    """A stepped-sine sweep failed part-way; completed points are attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateFitError(NnmlabError):
    """Least-squares fit attempted on degenerate (constant) signals."""


class PredictionError(NumericalError):
    """Latent rollout left the finite domain; truncated output attached."""

    def __init__(self, message, step=None, partial=None):
        super().__init__(message)
        self.step = step
        self.partial = partial
