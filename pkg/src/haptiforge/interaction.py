"""Maps symbolic VR contact events onto per-channel pulse patterns.

Contact events carry only the touched electrode, a target intensity level
and a begin/update/end kind; stimulus amplitude always comes from the
session calibration, never from the event stream. Updates are transactional:
either the new plan validates and schedules, or the event raises and the
previous plan is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BadParameter, Unschedulable
from .perception import IntensitySurface, invert
from .stimulator import (
    N_CHANNELS, PulsePattern, SafetyLimits, ScheduleOverflow, build_schedule,
    validate_pattern,
)

CONTACT_SCHEMA = "contact/1"

# Fallback anchor for the nearest-to inversion when a channel has no prior
# pattern and the event gives no texture hint: the center of the study grid.
DEFAULT_FREQUENCY_HZ = 50.0
DEFAULT_DUTY = 0.10

# Open-ended contacts are scheduled in rolling windows of this length.
PATTERN_HORIZON_MS = 1000.0

EVENT_KINDS = ("begin", "update", "end")


@dataclass(frozen=True)
class ContactEvent:
    electrode: int
    level: float
    kind: str
    timestamp_ms: float
    frequency_hint_hz: float | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise BadParameter(f"unknown event kind {self.kind!r}")
        if not (0 <= self.electrode < N_CHANNELS):
            raise BadParameter(f"electrode {self.electrode} outside 0..14")
        if not (1.0 <= self.level <= 5.0):
            raise BadParameter(f"level {self.level} outside [1, 5]")

    @classmethod
    def from_dict(cls, doc: dict) -> "ContactEvent":
        if doc.get("schema", CONTACT_SCHEMA) != CONTACT_SCHEMA:
            raise BadParameter(f"unsupported contact schema {doc.get('schema')!r}")
        for name in ("electrode", "level", "kind"):
            if name not in doc:
                raise BadParameter(f"contact event missing field {name!r}")
        try:
            return cls(electrode=int(doc["electrode"]), level=float(doc["level"]),
                       kind=doc["kind"],
                       timestamp_ms=float(doc.get("timestamp_ms", 0.0)),
                       frequency_hint_hz=(float(doc["frequency_hint_hz"])
                                          if doc.get("frequency_hint_hz") is not None
                                          else None))
        except (TypeError, ValueError) as exc:
            raise BadParameter(f"contact event field: {exc}") from exc


@dataclass(frozen=True)
class StimulusPlan:
    """Active pulse patterns keyed by channel, with a revision counter."""

    patterns: dict = field(default_factory=dict)
    revision: int = 0

    def channels(self) -> list:
        return sorted(self.patterns)

    def active_patterns(self) -> list:
        return [self.patterns[ch] for ch in self.channels()]


def apply_event(plan: StimulusPlan, event: ContactEvent,
                surface: IntensitySurface, amplitude_ma: float,
                limits: SafetyLimits | None = None) -> StimulusPlan:
    """Return the plan after the event; raise and leave `plan` unchanged on
    any validation or scheduling failure.

    begin/update choose (frequency, duty) by inverting the intensity surface
    at the event level, preferring parameters nearest the texture hint (or
    the channel's current parameters). end removes the channel; ending an
    inactive channel is a no-op that returns the identical plan.
    """
    limits = limits or SafetyLimits()
    if event.kind == "end":
        if event.electrode not in plan.patterns:
            return plan
        patterns = {ch: p for ch, p in plan.patterns.items() if ch != event.electrode}
        return StimulusPlan(patterns=patterns, revision=plan.revision + 1)

    current = plan.patterns.get(event.electrode)
    f0 = event.frequency_hint_hz if event.frequency_hint_hz is not None else \
        (current.frequency_hz if current else DEFAULT_FREQUENCY_HZ)
    d0 = current.duty if current else DEFAULT_DUTY
    freq, duty = invert(surface, event.level, ("nearest-to", f0, d0))
    pattern = PulsePattern(channel=event.electrode, frequency_hz=freq, duty=duty,
                           amplitude_ma=amplitude_ma,
                           duration_ms=PATTERN_HORIZON_MS)
    validate_pattern(pattern, limits)
    patterns = dict(plan.patterns)
    patterns[event.electrode] = pattern
    try:
        build_schedule(list(patterns.values()), limits)
    except ScheduleOverflow as exc:
        raise Unschedulable(str(exc)) from exc
    return StimulusPlan(patterns=patterns, revision=plan.revision + 1)
