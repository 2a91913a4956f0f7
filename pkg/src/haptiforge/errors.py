"""Typed error hierarchy.

Every failure mode callers are expected to handle has its own class so that
CLI exit paths and service responses can name the violated rule. Keep these
flat; the class name is the error code.
"""


class HaptiforgeError(Exception):
    """Base class for all package errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# -- geometry / layout ------------------------------------------------------

class NonFinite(HaptiforgeError):
    """Input contains NaN or infinite coordinates."""


class DegenerateInput(HaptiforgeError):
    """Geometry is ambiguous or self-conflicting (collinear points,
    crossed fingers, coincident frame axis, ...)."""


class PlacementInfeasible(HaptiforgeError):
    """Electrode clearance cannot be met even at the minimum diameter."""


class RoutingInfeasible(HaptiforgeError):
    """Trace lanes or the connector fan cannot fit inside the contour."""


# -- stimulator -------------------------------------------------------------

class BadParameter(HaptiforgeError):
    """A numeric field is outside its allowed range."""


class AmplitudeExceeded(HaptiforgeError):
    """Requested current is above the safety cap."""


class OnTimeTooShort(HaptiforgeError):
    """Pulse on-time per period is below the multiplexer floor."""


class InvalidPattern(HaptiforgeError):
    """A pulse pattern failed validation inside a composite operation."""


class ScheduleOverflow(HaptiforgeError):
    """Aggregate on-time plus dead-time does not fit in one frame."""


class ExclusivityViolated(HaptiforgeError):
    """Internal consistency failure: two channels active at once."""


# -- perception -------------------------------------------------------------

class MissingCell(HaptiforgeError):
    """A grid cell has no rating records."""


class OutOfDomain(HaptiforgeError):
    """Query point outside the interpolation grid."""


class TargetUnreachable(HaptiforgeError):
    """No stimulus parameters produce the requested intensity level."""


# -- interaction ------------------------------------------------------------

class Unschedulable(HaptiforgeError):
    """Applying the event would make the stimulus plan unschedulable."""


# -- wire protocol ----------------------------------------------------------

class DecodeError(HaptiforgeError):
    """Base class for frame decoding failures (all non-fatal)."""


class BadSof(DecodeError):
    """Buffer does not start with the frame delimiter."""


class Truncated(DecodeError):
    """Buffer ends before the frame is complete."""


class BadCrc(DecodeError):
    """Checksum mismatch."""


class FieldOutOfRange(HaptiforgeError):
    """A frame field is outside its encodable or safe range."""


class UnknownCommand(DecodeError):
    """Command byte not in the command table."""


# -- session ----------------------------------------------------------------

class OutOfOrder(HaptiforgeError):
    """Rating submitted for a trial that is not the current one."""


class BadRating(HaptiforgeError):
    """Rating outside the 1..5 categorical scale."""


class CalibrationAborted(HaptiforgeError):
    """Staircase ended without converging."""
