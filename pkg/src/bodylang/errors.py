"""Error taxonomy for the platform.

Four classes so clients can tell retryable from terminal:

* bad-request  -- malformed or rule-violating input (including failed presence)
* not-found    -- unknown or invisible entity (friend-gated lookups answer
                  not-found rather than leaking existence)
* conflict     -- state-machine violations (wrong state, double allocation,
                  lost fulfillment races)
* unavailable  -- recognizer backend faults; the attempt is voided, not failed
"""

from __future__ import annotations


class GameError(Exception):
    """Base class; ``code`` is the stable machine-readable identifier."""

    code = "error"
    http_status = 500


class BadRequestError(GameError):
    code = "bad-request"
    http_status = 400


class NotFoundError(GameError):
    code = "not-found"
    http_status = 404


class ConflictError(GameError):
    code = "conflict"
    http_status = 409


class UnavailableError(GameError):
    code = "unavailable"
    http_status = 503


class InvalidConfigError(BadRequestError):
    code = "invalid-config"


class PresenceFailedError(BadRequestError):
    code = "presence-failed"


class InsufficientEpError(BadRequestError):
    # Payment-required class: distinct HTTP status so clients can react to
    # an empty wallet specifically.
    code = "insufficient-ep"
    http_status = 402


class AlreadyAllocatedError(ConflictError):
    code = "already-allocated"


class RequestNotOpenError(ConflictError):
    code = "request-not-open"


class WrongStateError(ConflictError):
    code = "wrong-state"


class NotRequesterError(ConflictError):
    code = "not-requester"


class NotAFriendError(NotFoundError):
    # Friend-gated: answering "conflict" would reveal that the request exists.
    code = "not-a-friend"


class CameraNotAllowedError(ConflictError):
    code = "camera-not-allowed"


class EvaluationUnavailableError(UnavailableError):
    code = "evaluation-unavailable"


class MalformedBackendOutputError(UnavailableError):
    code = "malformed-backend-output"


class ZeroVarianceError(BadRequestError):
    code = "zero-variance"


class ParseError(BadRequestError):
    code = "parse-error"

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number
