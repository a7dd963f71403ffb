"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all collabdyn errors."""


class CorpusError(PipelineError):
    """Malformed or inconsistent corpus input."""


class VocabularyError(PipelineError):
    """Knowledge-element extraction cannot produce a usable vocabulary."""


class ConfigError(PipelineError):
    """Invalid configuration value or file."""


class ModelError(PipelineError):
    """Invalid model specification (unknown effect, bad covariate reference)."""


class EstimationError(PipelineError):
    """Estimation cannot proceed (ill-conditioned derivative, divergent iterates)."""
