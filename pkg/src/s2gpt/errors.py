"""Exception types shared across the package."""


class S2gptError(Exception):
    """Base class for all package errors."""


class ConfigError(S2gptError):
    """Bad or unknown run-configuration content."""


class ParameterDomainError(S2gptError):
    """A parameter point lies outside the PDE's parameter box."""


class SlotError(S2gptError):
    """Invalid slot content (NaN propagation) or derivative request."""


class GridError(S2gptError):
    """Invalid collocation-grid resolution."""


class DegenerateSnapshotError(S2gptError):
    """Snapshot numerically in the span of the current basis."""


class DegenerateResidualError(S2gptError):
    """Residual field numerically zero outside the excluded points."""


class ConsistencyError(S2gptError):
    """Internal invariant violated (e.g. duplicate sparse point)."""


class TrainingSetExhaustedError(S2gptError):
    """Greedy selection ran out of eligible parameters."""


class DivergenceError(S2gptError):
    """Training failed with non-finite loss after the retry policy."""


class ArtifactError(S2gptError):
    """Artifact store content missing or malformed."""
