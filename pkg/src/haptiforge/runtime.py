"""Single-writer device runtime.

Owns the mutable device state (stimulus plan, calibrated amplitude, session)
behind one lock; every mutation validates through the same safety path:
pattern validation, schedulability, then the wire codec over a loopback
"simulated link" that emulates the device-side register file and replies
ACK/NACK. Readers get immutable snapshot dicts.
"""

from __future__ import annotations

import copy
import threading
from dataclasses import dataclass

from .errors import BadParameter, DecodeError, FieldOutOfRange, OutOfOrder
from .interaction import ContactEvent, StimulusPlan, apply_event
from .perception import IntensitySurface, synthetic_default_surface
from .session import Session, SessionConfig, staircase_state
from .stimulator import (
    PulsePattern, SafetyLimits, build_schedule, schedule_summary, simulate,
    validate_pattern,
)
from . import protocol

# Channel wired to the study stimulus (forefinger fingertip electrode).
SESSION_CHANNEL = 3

EVENT_LOG_LIMIT = 1000


class DeviceRegisters:
    """Device-side register file behind the simulated link."""

    def __init__(self):
        self.patterns: dict = {}
        self.amplitude_ua: int = 1000

    def apply(self, frame: protocol.Frame) -> protocol.Frame:
        ack = protocol.Frame(command="ACK", sequence=frame.sequence,
                             payload={"acked_sequence": frame.sequence})
        if frame.command == "SET_PATTERN":
            self.patterns[frame.payload["channel"]] = dict(frame.payload)
        elif frame.command == "STOP_CHANNEL":
            self.patterns.pop(frame.payload["channel"], None)
        elif frame.command == "STOP_ALL":
            self.patterns.clear()
        elif frame.command == "SET_AMPLITUDE":
            self.amplitude_ua = frame.payload["amplitude_micro_amp"]
        elif frame.command == "PING":
            pass
        else:
            return protocol.Frame(command="NACK", sequence=frame.sequence,
                                  payload={"nacked_sequence": frame.sequence,
                                           "error_code": 1})
        return ack


class SimulatedLink:
    """Loopback transport that runs the codec end to end."""

    status = "simulated"

    def __init__(self):
        self.device = DeviceRegisters()
        self._decoder = protocol.StreamDecoder()
        self._sequence = 0

    def next_sequence(self) -> int:
        seq = self._sequence
        self._sequence = (self._sequence + 1) % 0x10000
        return seq

    def transact(self, frame: protocol.Frame) -> protocol.Frame:
        wire = protocol.encode(frame)
        frames = self._decoder.feed(wire)
        if len(frames) != 1:
            raise DecodeError("simulated link dropped the frame")
        reply = self.device.apply(frames[0])
        reply_wire = protocol.encode(reply)
        return protocol.decode(reply_wire)


@dataclass
class _SessionState:
    session: Session
    status: str = "ready"       # ready | playing | complete

    def prompt(self) -> dict | None:
        if self.session.done:
            return None
        f, d = self.session.current_trial()
        return {"trial": self.session.cursor, "total": len(self.session.plan),
                "frequency_hz": f, "duty": d, "status": self.status}


class DeviceRuntime:
    """The one writer of device state; snapshot readers never block it long."""

    def __init__(self, limits: SafetyLimits | None = None,
                 surface: IntensitySurface | None = None,
                 layout_doc: dict | None = None):
        self._lock = threading.Lock()
        self.limits = limits or SafetyLimits()
        self.surface = surface or synthetic_default_surface()
        self.layout_doc = layout_doc
        self.link = SimulatedLink()
        self._plan = StimulusPlan()
        self._calibrated_ma = 1.0
        self._calibration_responses: list | None = None
        self._session: _SessionState | None = None
        self._revision = 0
        self._events: list = []
        self._event_seq = 0

    # -- event log ------------------------------------------------------------

    def _push_event(self, kind: str, **payload) -> None:
        self._event_seq += 1
        self._events.append({"seq": self._event_seq, "type": kind,
                             "revision": self._revision, **payload})
        if len(self._events) > EVENT_LOG_LIMIT:
            del self._events[:len(self._events) - EVENT_LOG_LIMIT]

    def events_since(self, seq: int) -> list:
        with self._lock:
            return [copy.deepcopy(ev) for ev in self._events if ev["seq"] > seq]

    def latest_event_seq(self) -> int:
        with self._lock:
            return self._event_seq

    # -- plan mutations (all funnel through _commit_plan) ----------------------

    def _send_pattern(self, p: PulsePattern) -> None:
        frame = protocol.pattern_frame(p.channel, p.frequency_hz, p.duty,
                                       p.amplitude_ma, p.duration_ms,
                                       self.link.next_sequence())
        reply = self.link.transact(frame)
        if reply.command != "ACK":
            raise FieldOutOfRange(f"device rejected pattern: {reply.payload}")

    def _commit_plan(self, new_plan: StimulusPlan, removed: list) -> None:
        # schedulability was checked by the caller; mirror over the wire
        for ch in removed:
            reply = self.link.transact(protocol.Frame(
                command="STOP_CHANNEL", sequence=self.link.next_sequence(),
                payload={"channel": ch}))
            if reply.command != "ACK":
                raise FieldOutOfRange("device rejected stop")
        for ch in new_plan.channels():
            if self._plan.patterns.get(ch) != new_plan.patterns[ch]:
                self._send_pattern(new_plan.patterns[ch])
        self._plan = new_plan
        self._revision += 1
        self._push_event("state")

    def submit_pattern(self, p: PulsePattern) -> int:
        with self._lock:
            validate_pattern(p, self.limits)
            patterns = dict(self._plan.patterns)
            patterns[p.channel] = p
            build_schedule(list(patterns.values()), self.limits)
            self._commit_plan(StimulusPlan(patterns=patterns,
                                           revision=self._plan.revision + 1), [])
            return self._revision

    def stop_channel(self, channel: int) -> int:
        with self._lock:
            if not (0 <= channel < 15):
                raise BadParameter(f"channel {channel} outside 0..14")
            if channel not in self._plan.patterns:
                return self._revision
            patterns = {ch: p for ch, p in self._plan.patterns.items()
                        if ch != channel}
            self._commit_plan(StimulusPlan(patterns=patterns,
                                           revision=self._plan.revision + 1),
                              [channel])
            return self._revision

    def stop_all(self) -> int:
        with self._lock:
            reply = self.link.transact(protocol.Frame(
                command="STOP_ALL", sequence=self.link.next_sequence()))
            if reply.command != "ACK":
                raise FieldOutOfRange("device rejected stop-all")
            self._plan = StimulusPlan(patterns={},
                                      revision=self._plan.revision + 1)
            self._revision += 1
            self._push_event("state")
            return self._revision

    def apply_contact(self, event: ContactEvent) -> int:
        with self._lock:
            new_plan = apply_event(self._plan, event, self.surface,
                                   self._calibrated_ma, self.limits)
            if new_plan is self._plan:
                return self._revision
            removed = [ch for ch in self._plan.patterns if ch not in new_plan.patterns]
            self._commit_plan(new_plan, removed)
            return self._revision

    def set_amplitude(self, amplitude_ma: float) -> int:
        with self._lock:
            cap = min(3.0, self.limits.max_amplitude_ma)
            if not (0 < amplitude_ma <= cap):
                raise BadParameter(f"amplitude must be in (0, {cap}] mA")
            reply = self.link.transact(protocol.Frame(
                command="SET_AMPLITUDE", sequence=self.link.next_sequence(),
                payload={"amplitude_micro_amp": round(amplitude_ma * 1000)}))
            if reply.command != "ACK":
                raise FieldOutOfRange("device rejected amplitude")
            self._calibrated_ma = amplitude_ma
            self._revision += 1
            self._push_event("state")
            return self._revision

    # -- calibration staircase -------------------------------------------------

    def calibration_start(self) -> dict:
        with self._lock:
            self._calibration_responses = []
            self._revision += 1
            self._push_event("state")
            return staircase_state([])

    def calibration_respond(self, response: str) -> dict:
        with self._lock:
            if self._calibration_responses is None:
                raise OutOfOrder("no calibration in progress")
            state = staircase_state(self._calibration_responses + [response])
            self._calibration_responses.append(response)
            if state["result"] is not None:
                self._calibration_responses = None
        if state["result"] is not None:
            self.set_amplitude(state["result"])
        return state

    # -- psychophysics session --------------------------------------------------

    def session_start(self, config: SessionConfig, path=None) -> dict:
        with self._lock:
            session = Session.create(config, path=path)
            self._session = _SessionState(session=session)
            self._revision += 1
            self._push_event("trial", prompt=self._session.prompt())
            return self._session.prompt()

    def session_advance(self) -> dict:
        """Play the current trial's stimulus on the session channel."""
        with self._lock:
            st = self._require_session()
            if st.session.done:
                raise OutOfOrder("session already complete")
            f, d = st.session.current_trial()
            pattern = PulsePattern(channel=SESSION_CHANNEL, frequency_hz=f,
                                   duty=d, amplitude_ma=st.session.config.amplitude_ma,
                                   duration_ms=st.session.config.stimulus_s * 1000.0)
            validate_pattern(pattern, self.limits)
            build_schedule([pattern], self.limits)
            # the session owns the device while it runs
            reply = self.link.transact(protocol.Frame(
                command="STOP_ALL", sequence=self.link.next_sequence()))
            if reply.command != "ACK":
                raise FieldOutOfRange("device rejected stop-all")
            self._send_pattern(pattern)
            self._plan = StimulusPlan(patterns={SESSION_CHANNEL: pattern},
                                      revision=self._plan.revision + 1)
            st.status = "playing"
            self._revision += 1
            self._push_event("trial", prompt=st.prompt())
            return st.prompt()

    def session_rate(self, trial_index: int, rating: int) -> dict | None:
        with self._lock:
            st = self._require_session()
            st.session.record_rating(trial_index, rating)
            if SESSION_CHANNEL in self._plan.patterns:
                reply = self.link.transact(protocol.Frame(
                    command="STOP_CHANNEL", sequence=self.link.next_sequence(),
                    payload={"channel": SESSION_CHANNEL}))
                if reply.command != "ACK":
                    raise FieldOutOfRange("device rejected stop")
                self._plan = StimulusPlan(
                    patterns={ch: p for ch, p in self._plan.patterns.items()
                              if ch != SESSION_CHANNEL},
                    revision=self._plan.revision + 1)
            st.status = "complete" if st.session.done else "ready"
            self._revision += 1
            prompt = st.prompt()
            self._push_event("trial", prompt=prompt)
            return prompt

    def session_csv(self) -> str:
        with self._lock:
            st = self._require_session()
            return st.session.to_csv()

    def _require_session(self) -> _SessionState:
        if self._session is None:
            raise OutOfOrder("no session started")
        return self._session

    # -- reads -------------------------------------------------------------------

    def snapshot(self) -> dict:
        with self._lock:
            patterns = {
                str(ch): {
                    "channel": p.channel,
                    "frequency_hz": p.frequency_hz,
                    "duty": p.duty,
                    "amplitude_ma": p.amplitude_ma,
                    "duration_ms": p.duration_ms,
                }
                for ch, p in sorted(self._plan.patterns.items())
            }
            schedule = {}
            if self._plan.patterns:
                events = build_schedule(list(self._plan.patterns.values()),
                                        self.limits)
                schedule = {str(ch): rec for ch, rec in schedule_summary(
                    events, list(self._plan.patterns.values())).items()}
            session = None
            if self._session is not None:
                session = {
                    "participant_id": self._session.session.config.participant_id,
                    "status": self._session.status,
                    "completed": self._session.session.cursor,
                    "total": len(self._session.session.plan),
                    "prompt": self._session.prompt(),
                }
            return {
                "revision": self._revision,
                "link": self.link.status,
                "limits": {
                    "max_amplitude_ma": self.limits.max_amplitude_ma,
                    "supply_voltage_v": self.limits.supply_voltage_v,
                    "dead_time_us": self.limits.dead_time_us,
                },
                "calibrated_amplitude_ma": self._calibrated_ma,
                "calibrating": self._calibration_responses is not None,
                "plan": {"revision": self._plan.revision, "patterns": patterns},
                "schedule": schedule,
                "session": session,
            }

    def waveform(self, duration_ms: float = 100.0, dt_us: float = 1.0) -> dict:
        """Render the current plan over a window and report per-channel
        on-fractions plus the exclusivity verdict."""
        with self._lock:
            patterns = [
                PulsePattern(channel=p.channel, frequency_hz=p.frequency_hz,
                             duty=p.duty, amplitude_ma=p.amplitude_ma,
                             duration_ms=duration_ms)
                for p in self._plan.active_patterns()
            ]
            limits = self.limits
        if not patterns:
            return {"duration_ms": duration_ms, "channels": {}, "exclusive": True}
        events = build_schedule(patterns, limits)
        trace = simulate(events, patterns, limits, dt_us=dt_us)
        return {
            "duration_ms": trace.duration_us / 1000.0,
            "exclusive": bool(trace.active_count_per_tick().max(initial=0) <= 1),
            "channels": {
                str(p.channel): {"on_fraction": trace.on_fraction(p.channel),
                                 "amplitude_ma": p.amplitude_ma}
                for p in patterns
            },
        }
