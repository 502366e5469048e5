"""Exception types shared across the package."""


class StagwaveError(Exception):
    """Base class for package-specific errors."""


class DomainError(StagwaveError):
    """Geometric or numeric precondition violated (sizes, spacings, ratios)."""


class MisalignmentError(DomainError):
    """Grids meeting at an interface share no matching points."""


class UnsupportedRatioError(DomainError):
    """No tabulated interpolation pair exists for the requested spacing ratio."""


class InfeasibleStencilError(StagwaveError):
    """The interpolation constraint system has no solution for the given support."""


class FormatError(StagwaveError):
    """A gridded model file does not match its declared shape or value type."""


class OutOfCoverageError(StagwaveError):
    """A subgrid point falls outside the gridded model's data hull."""


class SizeError(StagwaveError):
    """Dense materialization requested above the size cap."""


class ConfigError(StagwaveError):
    """Run configuration is malformed or internally inconsistent."""


class VerificationFailure(StagwaveError):
    """A verification suite did not meet its acceptance threshold."""
