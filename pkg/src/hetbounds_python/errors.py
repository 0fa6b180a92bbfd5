import warnings


class HetBoundsError(Exception):
    """Base class for all package errors; ``module`` names the component in ``error[<module>]`` reports."""

    module = "hetbounds"

    def __init__(self, message, module=None):
        super().__init__(message)
        if module is not None:
            self.module = module


class SchemaError(HetBoundsError):
    """Input table does not match the declared column roles."""

    module = "core_data"


class OverlapError(HetBoundsError):
    """Propensity score outside the validated overlap band."""

    module = "core_data"


class ConfigurationError(HetBoundsError):
    """Invalid settings (fold counts, grids, learner names, reps)."""

    module = "config"


class FoldError(HetBoundsError):
    """A training complement cannot support the nuisance fits."""

    module = "nuisance_learners"


class ScoreError(HetBoundsError):
    """Pseudo-outcomes could not be evaluated."""

    module = "orthogonal_scores"


class ProjectionError(HetBoundsError):
    """Series regression could not be solved."""

    module = "series_projection"


class SolverError(HetBoundsError):
    """A numerical solver left its bracket or exhausted its budget."""

    module = "pointwise_inference"


class StudyError(HetBoundsError):
    """Too many failed replications in a simulation study."""

    module = "roy_simulator"


class HetBoundsWarning(UserWarning):
    """Recoverable numerical degeneracy."""


def emit_warning(logger, message, *args):
    """Log ``message`` at WARNING and raise it as a :class:`HetBoundsWarning`."""
    text = message % args if args else message
    logger.warning(text)
    warnings.warn(text, HetBoundsWarning, stacklevel=3)
