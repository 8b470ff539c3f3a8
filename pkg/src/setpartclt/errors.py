class ResourceLimitError(ValueError):
    """A request exceeds a configured size cap."""


class InvalidProfileError(ValueError):
    """A min/max profile admits no partition."""
