"""Exception types shared across the package."""


class TrustmeshError(Exception):
    """Base class for all package errors."""


class ProtocolAbort(TrustmeshError):
    """A protocol run aborted after identifying misbehaving participants.

    ``faulty_ids`` names the participants whose messages failed verification.
    """

    def __init__(self, message: str, faulty_ids=()):
        super().__init__(message)
        self.faulty_ids = tuple(sorted(faulty_ids))


class NonceReuseError(TrustmeshError):
    """A single-use nonce pair was requested twice."""


class ConfigError(TrustmeshError):
    """A scenario or CLI configuration is invalid."""
