"""Behavioral model of the 15-channel wrist-worn stimulator.

Square-wave pulse patterns are multiplexed so that only one channel drives
current at any instant; consecutive windows are separated by the MUX
dead-time. Scheduling happens in integer nanoseconds so event lists are
byte-for-byte reproducible; public event times are microseconds.

This is a behavioral simulator (ideal constant-current source with supply
compliance), not a circuit-level one: no electrode impedance or skin
dynamics are modeled.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmplitudeExceeded, BadParameter, ExclusivityViolated, InvalidPattern,
    OnTimeTooShort, ScheduleOverflow,
)

N_CHANNELS = 15

HARD_AMPLITUDE_CAP_MA = 3.0       # never exceeded by any pattern
ABSOLUTE_LIMIT_CEILING_MA = 10.0  # SafetyLimits.max_amplitude can never exceed this
MAX_FREQUENCY_HZ = 10_000.0
MIN_ON_TIME_US = 3.0              # 2x the MUX dead-time

CH_ON = "on"
CH_OFF = "off"
ALL_OFF = "all-off"


@dataclass(frozen=True)
class PulsePattern:
    """One channel's square-wave stimulus."""

    channel: int
    frequency_hz: float
    duty: float
    amplitude_ma: float
    duration_ms: float

    @property
    def period_us(self) -> float:
        return 1e6 / self.frequency_hz

    @property
    def on_time_us(self) -> float:
        return self.duty * self.period_us


@dataclass(frozen=True)
class SafetyLimits:
    max_amplitude_ma: float = HARD_AMPLITUDE_CAP_MA
    supply_voltage_v: float = 90.0
    dead_time_us: float = 1.5

    def __post_init__(self):
        if not (0 < self.max_amplitude_ma <= ABSOLUTE_LIMIT_CEILING_MA):
            raise BadParameter(
                f"max_amplitude_ma must be in (0, {ABSOLUTE_LIMIT_CEILING_MA}]")
        if self.supply_voltage_v <= 0 or self.dead_time_us <= 0:
            raise BadParameter("supply voltage and dead time must be positive")


@dataclass(frozen=True)
class ScheduleEvent:
    time_us: float
    action: str           # CH_ON | CH_OFF | ALL_OFF
    channel: int = -1     # -1 for ALL_OFF


def validate_pattern(p: PulsePattern, limits: SafetyLimits | None = None) -> None:
    """Raise a typed error naming the violated bound; return None when ok."""
    limits = limits or SafetyLimits()
    if not isinstance(p.channel, int) or not (0 <= p.channel < N_CHANNELS):
        raise BadParameter(f"channel {p.channel} outside 0..{N_CHANNELS - 1}")
    if not (math.isfinite(p.frequency_hz) and p.frequency_hz > 0):
        raise BadParameter("frequency must be finite and positive")
    if p.frequency_hz > MAX_FREQUENCY_HZ:
        raise BadParameter(f"frequency above {MAX_FREQUENCY_HZ:g} Hz ceiling")
    if not (math.isfinite(p.duty) and 0 < p.duty < 1):
        raise BadParameter("duty must lie strictly between 0 and 1")
    if not (math.isfinite(p.amplitude_ma) and p.amplitude_ma >= 0):
        raise BadParameter("amplitude must be finite and non-negative")
    cap = min(HARD_AMPLITUDE_CAP_MA, limits.max_amplitude_ma)
    if p.amplitude_ma > cap:
        raise AmplitudeExceeded(f"amplitude {p.amplitude_ma} mA exceeds {cap} mA cap")
    if not (math.isfinite(p.duration_ms) and p.duration_ms > 0):
        raise BadParameter("duration must be finite and positive")
    if p.on_time_us < MIN_ON_TIME_US:
        raise OnTimeTooShort(
            f"on-time {p.on_time_us:.3g} us below the {MIN_ON_TIME_US} us floor")


def _ns(us: float) -> int:
    return round(us * 1000.0)


def build_schedule(patterns: list, limits: SafetyLimits | None = None) -> list:
    """Serialize patterns into exclusive on/off events.

    Time is cut into frames equal to the shortest requested period. Within
    each frame the active channels get their on-windows back to back in
    channel-id order, separated by dead-time gaps, so the realized
    on-fraction of channel i equals duty_i while its realized period is the
    frame length. The schedule ends with an all-off event on the last frame
    boundary at or after the longest pattern duration.
    """
    limits = limits or SafetyLimits()
    if not patterns:
        return [ScheduleEvent(time_us=0.0, action=ALL_OFF)]
    seen = set()
    for p in patterns:
        try:
            validate_pattern(p, limits)
        except Exception as exc:
            raise InvalidPattern(f"channel {p.channel}: {exc}") from exc
        if p.channel in seen:
            raise InvalidPattern(f"duplicate pattern for channel {p.channel}")
        seen.add(p.channel)

    ordered = sorted(patterns, key=lambda p: p.channel)
    frame_ns = min(_ns(p.period_us) for p in ordered)
    dead_ns = _ns(limits.dead_time_us)
    windows = {p.channel: round(p.duty * frame_ns) for p in ordered}
    need = sum(windows.values()) + dead_ns * len(ordered)
    if need > frame_ns:
        raise ScheduleOverflow(
            f"{need / 1000:.1f} us of on-time plus dead-time exceeds the "
            f"{frame_ns / 1000:.1f} us frame")

    duration_ns = {p.channel: _ns(p.duration_ms * 1000.0) for p in ordered}
    total_ns = max(duration_ns.values())
    n_frames = max(1, math.ceil(total_ns / frame_ns))

    events = []
    for k in range(n_frames):
        t = k * frame_ns
        for p in ordered:
            if t >= duration_ns[p.channel]:
                continue
            on = windows[p.channel]
            events.append(ScheduleEvent(time_us=t / 1000.0, action=CH_ON,
                                        channel=p.channel))
            events.append(ScheduleEvent(time_us=(t + on) / 1000.0, action=CH_OFF,
                                        channel=p.channel))
            t += on + dead_ns
    events.append(ScheduleEvent(time_us=(n_frames * frame_ns) / 1000.0,
                                action=ALL_OFF))
    return events


@dataclass(frozen=True)
class WaveformTrace:
    """Sampled per-channel current. Samples are materialized lazily from the
    on-interval list; every channel has duration/dt samples."""

    dt_us: float
    n_ticks: int
    amplitudes: dict                  # channel -> mA
    intervals: dict = field(default_factory=dict)  # channel -> [(on_ns, off_ns)]

    @property
    def duration_us(self) -> float:
        return self.n_ticks * self.dt_us

    def channel_samples(self, channel: int) -> np.ndarray:
        dt_ns = _ns(self.dt_us)
        out = np.zeros(self.n_ticks)
        amp = self.amplitudes.get(channel, 0.0)
        for on, off in self.intervals.get(channel, []):
            a = -(-on // dt_ns)              # ceil
            b = -(-off // dt_ns)
            out[max(0, a):min(self.n_ticks, b)] = amp
        return out

    def on_fraction(self, channel: int) -> float:
        """Fraction of ticks the channel is on (grid-exact, no materialization)."""
        dt_ns = _ns(self.dt_us)
        ticks = 0
        for on, off in self.intervals.get(channel, []):
            a = max(0, -(-on // dt_ns))
            b = min(self.n_ticks, -(-off // dt_ns))
            ticks += max(0, b - a)
        return ticks / self.n_ticks if self.n_ticks else 0.0

    def active_count_per_tick(self) -> np.ndarray:
        """Number of simultaneously-on channels at every tick."""
        dt_ns = _ns(self.dt_us)
        diff = np.zeros(self.n_ticks + 1, dtype=np.int32)
        for spans in self.intervals.values():
            for on, off in spans:
                a = max(0, min(self.n_ticks, -(-on // dt_ns)))
                b = max(0, min(self.n_ticks, -(-off // dt_ns)))
                diff[a] += 1
                diff[b] -= 1
        return np.cumsum(diff[:-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = [self.channel_samples(ch) for ch in range(N_CHANNELS)]
        buf.write("time_us," + ",".join(f"ch{ch}_ma" for ch in range(N_CHANNELS)) + "\n")
        for k in range(self.n_ticks):
            row = ",".join(f"{cols[ch][k]:g}" for ch in range(N_CHANNELS))
            buf.write(f"{k * self.dt_us:g},{row}\n")
        return buf.getvalue()


def simulate(events: list, patterns: list, limits: SafetyLimits | None = None,
             dt_us: float = 1.0) -> WaveformTrace:
    """Render a schedule to a waveform trace and verify channel exclusivity.

    Raises ExclusivityViolated when two channels overlap at any tick or when
    an off->on handover is shorter than the dead time (a scheduler bug).
    """
    limits = limits or SafetyLimits()
    if dt_us <= 0:
        raise BadParameter("dt must be positive")
    amplitudes = {p.channel: p.amplitude_ma for p in patterns}
    intervals: dict = {}
    open_since: dict = {}
    end_ns = 0
    last_ns = -1
    for ev in events:
        t = _ns(ev.time_us)
        if t < last_ns:
            raise ExclusivityViolated("events out of order")
        last_ns = t
        if ev.action == CH_ON:
            if ev.channel in open_since:
                raise ExclusivityViolated(f"channel {ev.channel} turned on twice")
            open_since[ev.channel] = t
        elif ev.action == CH_OFF:
            if ev.channel not in open_since:
                raise ExclusivityViolated(f"channel {ev.channel} off without on")
            intervals.setdefault(ev.channel, []).append((open_since.pop(ev.channel), t))
        elif ev.action == ALL_OFF:
            for ch, since in sorted(open_since.items()):
                intervals.setdefault(ch, []).append((since, t))
            open_since.clear()
        else:
            raise BadParameter(f"unknown event action {ev.action!r}")
        end_ns = max(end_ns, t)
    for ch, since in sorted(open_since.items()):
        intervals.setdefault(ch, []).append((since, end_ns))

    spans = sorted((on, off, ch) for ch, lst in intervals.items() for on, off in lst)
    dead_ns = _ns(limits.dead_time_us)
    for (a_on, a_off, a_ch), (b_on, b_off, b_ch) in zip(spans, spans[1:]):
        if b_on < a_off:
            raise ExclusivityViolated(
                f"channels {a_ch} and {b_ch} overlap at {b_on / 1000} us")
        if a_ch != b_ch and b_on - a_off < dead_ns:
            raise ExclusivityViolated(
                f"gap {(b_on - a_off) / 1000} us between channels "
                f"{a_ch} and {b_ch} is below the dead time")

    dt_ns = _ns(dt_us)
    n_ticks = max(1, -(-end_ns // dt_ns)) if end_ns > 0 else 1
    trace = WaveformTrace(dt_us=dt_us, n_ticks=int(n_ticks),
                          amplitudes=amplitudes, intervals=intervals)
    if int(trace.active_count_per_tick().max(initial=0)) > 1:
        raise ExclusivityViolated("more than one channel active at a tick")
    return trace


def schedule_summary(events: list, patterns: list) -> dict:
    """Realized per-channel on-fraction and window count over the schedule."""
    by_ch: dict = {}
    open_since: dict = {}
    end = 0.0
    for ev in events:
        end = max(end, ev.time_us)
        if ev.action == CH_ON:
            open_since[ev.channel] = ev.time_us
        elif ev.action == CH_OFF and ev.channel in open_since:
            rec = by_ch.setdefault(ev.channel, {"on_us": 0.0, "windows": 0})
            rec["on_us"] += ev.time_us - open_since.pop(ev.channel)
            rec["windows"] += 1
    out = {}
    for p in patterns:
        rec = by_ch.get(p.channel, {"on_us": 0.0, "windows": 0})
        out[p.channel] = {
            "requested_duty": p.duty,
            "requested_frequency_hz": p.frequency_hz,
            "realized_duty": rec["on_us"] / end if end else 0.0,
            "windows": rec["windows"],
        }
    return out


def output_current(v_dac_v: float, r_emitter_ohm: float, r_load_ohm: float,
                   limits: SafetyLimits | None = None) -> float:
    """Delivered current (mA) of the ideal regulator.

    Set-point v_dac/R_e, clamped by supply compliance V/(R_load + R_e) and by
    the amplitude cap. Non-decreasing in v_dac.
    """
    limits = limits or SafetyLimits()
    if r_emitter_ohm <= 0:
        raise BadParameter("emitter resistance must be positive")
    if r_load_ohm < 0 or v_dac_v < 0:
        raise BadParameter("load resistance and DAC voltage must be non-negative")
    set_point_ma = v_dac_v / r_emitter_ohm * 1000.0
    compliance_ma = limits.supply_voltage_v / (r_load_ohm + r_emitter_ohm) * 1000.0
    cap_ma = min(HARD_AMPLITUDE_CAP_MA, limits.max_amplitude_ma)
    return min(set_point_ma, compliance_ma, cap_ma)


def charge_per_period_uc(p: PulsePattern) -> float:
    """Charge delivered per period in microcoulombs: amplitude x on-time."""
    return p.amplitude_ma * p.duty / p.frequency_hz * 1000.0


def events_to_json(events: list) -> list:
    return [
        {"time_us": ev.time_us, "action": ev.action,
         **({"channel": ev.channel} if ev.channel >= 0 else {})}
        for ev in events
    ]
