"""Exception hierarchy shared across the package.

Contract violations (programming errors such as mismatched lengths) raise
plain ``ValueError``; the classes below cover user-facing failure modes that
callers are expected to handle or map to exit codes.
"""


class CorfError(Exception):
    """Base class for all package-specific errors."""


class InputError(CorfError):
    """Invalid user-supplied data: malformed files, bad labels, bad schema."""


class ConvergenceError(CorfError):
    """The co-data model optimizer failed to converge.

    Carries the diagnostics dict (iterations, objective, gradient norm)
    as the ``diagnostics`` attribute.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ModelFormatError(CorfError):
    """Base class for model-container load failures."""


class NotACorfModelError(ModelFormatError):
    """File does not start with the expected magic bytes."""


class ModelVersionError(ModelFormatError):
    """Container format version is not supported by this build."""


class TruncatedModelError(ModelFormatError):
    """Container ends before the declared payload plus footer."""


class CorruptModelError(ModelFormatError):
    """Checksum footer does not match the container body."""
