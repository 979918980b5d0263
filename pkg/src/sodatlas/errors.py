"""Exception hierarchy shared by every sodatlas module."""


class SodatlasError(Exception):
    """Base class for everything raised on purpose by this package."""


class InputError(SodatlasError, ValueError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class UnsupportedRangeError(InputError):
    """Request outside the range the algorithms are complete for."""


class ActionError(InputError):
    """Group-action data that fails validation."""


class MoveError(SodatlasError):
    """A mutation move whose precondition fails on the given collection."""


class VerificationError(SodatlasError):
    """A replay or certificate check that did not come out true (CLI exit code 1)."""
