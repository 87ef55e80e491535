"""Exception types shared across the package."""


class ModelError(Exception):
    """A model or argument violates a documented precondition.

    ``code`` is a short machine-readable tag such as ``"PARTIAL_ASSIGNMENT"``.
    """

    def __init__(self, code, message="", node=None):
        self.code = code
        self.node = node
        text = code if not message else f"{code}: {message}"
        super().__init__(text)


class ValidationError(ModelError):
    """Raised when an operation receives a diagram that fails :func:`validate`."""

    def __init__(self, report):
        self.report = report
        first = report.errors[0]
        super().__init__(first.code, str(report), node=first.node)


class ResourceError(ModelError):
    """The requested enumeration exceeds the configured joint-size cap."""
