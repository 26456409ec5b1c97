"""Exception hierarchy shared by every component."""

from __future__ import annotations


class VVoteError(Exception):
    """Base class for protocol and configuration errors."""


class ParameterError(VVoteError, ValueError):
    """An argument is outside its documented domain."""


class ConfigError(VVoteError):
    """The election configuration violates a structural invariant."""


class IntegrityError(VVoteError):
    """Authenticated decryption or a digest check failed."""


class ThresholdError(VVoteError):
    """Fewer than the threshold of valid shares were supplied.

    ``invalid`` lists the indices of shares rejected for a bad proof or
    signature.
    """

    def __init__(self, message: str, invalid: tuple[int, ...] = ()) -> None:
        super().__init__(message)
        self.invalid = tuple(invalid)


class SequencingError(VVoteError):
    """An operation was attempted before its protocol prerequisites."""


class CommitmentMismatch(VVoteError):
    """A randomness-table cell does not open its published commitment."""

    def __init__(self, peer: int, serial: str, column: int) -> None:
        super().__init__(f"commitment mismatch: peer {peer}, serial {serial}, column {column}")
        self.peer = peer
        self.serial = serial
        self.column = column


class OutOfBallots(VVoteError):
    """The printer has no unissued generic ballots left."""


class UnavailableError(VVoteError):
    """The requested randomness has been deleted."""


class Rejected(VVoteError):
    """A bulletin-board peer (or quorum) refused a submission.

    ``reason`` is a short machine-readable code such as ``"clash"``.
    """

    def __init__(self, reason: str, detail: str = "") -> None:
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


class ExpiryError(VVoteError):
    """The printed ballot is older than the session-start window."""


class SessionLockError(VVoteError):
    """A voting session was already started for this serial."""


class ForgedBallotError(VVoteError):
    """The ballot's serial signature does not verify."""


class ShapeError(VVoteError):
    """A preference list does not match the race size."""


class StationLocked(VVoteError):
    """The cancel station reached its cancellation limit."""


class NoReceipt(VVoteError):
    """A threshold receipt could not be assembled in time."""


class InformalVote(VVoteError):
    """Preferences fail a formality rule and the voter has not acknowledged the warning."""

    def __init__(self, warnings: list[str]) -> None:
        super().__init__("; ".join(warnings))
        self.warnings = warnings
