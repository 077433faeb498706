"""Exception types shared across the package.

Everything raised for bad *input* derives from :class:`InputError`, which the
CLI maps to exit code 1; anything else is treated as an internal error
(exit code 2).
"""


class PerfSentryError(Exception):
    """Base class for package errors."""


class InputError(PerfSentryError, ValueError):
    """Rejected input: malformed files, bad parameters, unknown references."""


class InvalidObservationError(InputError):
    """An observation is NaN or infinite."""


class ClusterTooSmallError(InputError):
    """A divergence side has fewer than two observations."""


class InvalidParamsError(InputError):
    """Detector or pipeline parameters violate their documented ranges."""


class EmptyRegionError(InputError):
    """Stable-region statistics requested for zero values."""


class HazardUndefinedError(InputError):
    """Hazard level requested for a region pair with a non-positive mean."""


class UntestedRevisionError(InputError):
    """A suspect range was requested for a revision with no test result."""


class UnregisteredProjectError(InputError):
    """A bundle referenced a project with no imported commit log."""


class BundleRejectedError(InputError):
    """A result bundle failed validation; carries an itemized report."""

    def __init__(self, message: str, items: list[str] | None = None):
        super().__init__(message)
        self.items = items or []

    def report(self) -> str:
        lines = [str(self)]
        lines.extend(f"  - {item}" for item in self.items)
        return "\n".join(lines)


class StoreError(PerfSentryError):
    """Inconsistent store state or a rejected store operation."""
