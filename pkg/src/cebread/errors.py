"""Exception hierarchy shared across the toolkit.

Every error raised on a user-facing path derives from CebreadError so the
CLI can catch one type, print the message, and exit nonzero.
"""


class CebreadError(Exception):
    """Base class for all toolkit errors."""


class CorpusError(CebreadError):
    """Corpus file missing, malformed, or violating corpus invariants."""


class FeatureError(CebreadError):
    """Feature extraction or feature-matrix assembly failure."""


class EmbeddingError(CebreadError):
    """Embeddings file missing, malformed, or inconsistent."""


class ModelError(CebreadError):
    """Invalid hyperparameters, unusable training data, or schema mismatch."""


class EvalError(CebreadError):
    """Cross-validation, grid-search, or metric computation failure."""


class ConfigError(CebreadError):
    """Bad CLI flag combination or unreadable config file."""
