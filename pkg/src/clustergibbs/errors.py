"""Exception types shared by every module."""


class ClusterGibbsError(Exception):
    """Base class for all library errors."""


class InvalidInputError(ClusterGibbsError, ValueError):
    """Raised when arguments violate an operation's preconditions."""


class ResourceGuardError(ClusterGibbsError):
    """Raised when an exhaustive enumeration would exceed its budget.

    Enumerations never truncate silently; shrink the problem instead.
    """


class CertificateRefusedError(ClusterGibbsError):
    """Raised when a convergence certificate cannot be issued (lambda > lambda_0)."""
