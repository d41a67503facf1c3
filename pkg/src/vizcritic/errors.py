"""Exception types shared across the package."""


class VizcriticError(Exception):
    """Base class for all errors raised by this package."""


class DecodeError(VizcriticError):
    """Byte stream is not a decodable png/jpeg image."""


class SizeError(VizcriticError):
    """Image dimensions fall outside the accepted 100-2000 px range."""


class FormatError(VizcriticError):
    """Declared image format is not png or jpeg."""


class BackendError(VizcriticError):
    """An external analysis backend failed or returned malformed output."""

    def __init__(self, message, retry_after=None):
        super().__init__(message)
        self.retry_after = retry_after


class EmptyReference(VizcriticError):
    """A percentile lookup was attempted against an empty reference list."""


class SchemaError(VizcriticError):
    """A metrics bundle or stored document violates the expected schema."""


class EmptyQuestion(VizcriticError):
    """Prompt assembly was given an empty question."""


class UnknownFilter(VizcriticError):
    """Requested filter id is not configured."""


class ReplayMiss(VizcriticError):
    """Replay mode found no recorded exchange for a prompt digest."""

    def __init__(self, digest):
        super().__init__(f"no recorded exchange for digest {digest}")
        self.digest = digest


class MissingText(VizcriticError):
    """Report assembly is missing generated text for a finding."""


class SchemaMismatch(VizcriticError):
    """Two report documents use incompatible schema versions."""


class ValidationError(VizcriticError):
    """Invalid user-supplied value (empty project name, bad config, ...)."""


class UnknownProject(VizcriticError):
    """Project id does not exist in the store."""


class UnknownRevision(VizcriticError):
    """Revision sequence number does not exist in the project."""


class NotReady(VizcriticError):
    """Revision analysis has not completed yet (or failed)."""

    def __init__(self, status, detail=""):
        super().__init__(f"report not ready (status={status})" + (f": {detail}" if detail else ""))
        self.status = status
        self.detail = detail


class StageError(VizcriticError):
    """Pipeline stage failure, tagged with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
