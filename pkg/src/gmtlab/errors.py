"""Exception types shared by the library, the service and the CLI."""


class GmtlabError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class PreconditionError(GmtlabError, ValueError):
    """An input violates a documented precondition (CLI exit code 2)."""

    exit_code = 2

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class VerificationError(GmtlabError):
    """A computed object failed its own post-hoc certificate (CLI exit code 3)."""

    exit_code = 3

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
