"""Exceptions shared across generation stages."""


class GenerationRetry(Exception):
    """A placement constraint failed; resample the layout."""


class GenerationError(RuntimeError):
    """Placement kept failing across the retry budget."""
