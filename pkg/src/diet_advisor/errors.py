"""Exception hierarchy shared across the package."""


class AdvisorError(Exception):
    """Base class for all package-specific errors."""


class EmptyTokenError(AdvisorError):
    """Raised when a name or allergen token is empty after trimming."""


class InvalidProfileError(AdvisorError):
    """A user profile failed validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(f"invalid profile: {', '.join(str(v) for v in self.violations)}")


class DuplicateUserError(AdvisorError):
    """A user with the same canonical name already exists."""


class DuplicateDishError(AdvisorError):
    """A dish with the same canonical name already exists."""


class NotFoundError(AdvisorError):
    """Lookup by name found no matching entity."""


class SnapshotIoError(AdvisorError):
    """Snapshot file could not be read or written."""


class SchemaVersionMismatchError(AdvisorError):
    """Snapshot file declares a schema version this build does not understand."""


class SnapshotParseError(AdvisorError):
    """Snapshot or ingestion record is malformed; names the offending record."""

    def __init__(self, message, record_index=None):
        self.record_index = record_index
        super().__init__(message)


class UnsupportedIntentError(AdvisorError):
    """An out-of-scope intent reached the query compiler."""


class BackendUnavailableError(AdvisorError):
    """The remote language-model backend could not be reached."""


class TooLargeError(AdvisorError):
    """Brute-force enumeration refused: instance exceeds the safety guard."""


class EmptyReportError(AdvisorError):
    """A solver explanation was requested for a report with no solutions."""


class InternalError(AdvisorError):
    """Defensive guard tripped (schema drift, impossible state)."""
