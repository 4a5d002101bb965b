"""
Exception hierarchy shared by the numerical core and the command line.

Every error carries the process exit code and a short error code that the CLI
reports in its JSON error document.
"""


class QflowError(Exception):
    exit_code = 1
    error_code = "QFLOW_ERROR"

    def __init__(self, message: str, detail: str = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class SpecValidationError(QflowError):
    """A manifest, game spec or run configuration failed validation."""
    exit_code = 2
    error_code = "SPEC_VALIDATION"


class DimensionMismatchError(SpecValidationError, ValueError):
    error_code = "DIMENSION_MISMATCH"


class DomainError(SpecValidationError, ValueError):
    """A scalar function was evaluated outside its domain."""
    error_code = "DOMAIN_ERROR"


class ConvergenceError(QflowError):
    exit_code = 3
    error_code = "CONVERGENCE_FAILURE"


class IntegrationError(QflowError):
    exit_code = 3
    error_code = "INTEGRATION_FAILURE"


class BoundaryCollisionError(IntegrationError):
    """A primal trajectory reached the boundary of the spectraplex."""
    error_code = "BOUNDARY_COLLISION"


class MissingDataError(QflowError):
    exit_code = 4
    error_code = "MISSING_DATA"
