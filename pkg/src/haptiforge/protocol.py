"""Binary framing codec for the host <-> stimulator serial link.

Frame layout (all multi-byte fields little-endian):

    offset  size  field
    0       1     SOF, always 0xA5
    1       1     version, always 0x01
    2       1     command code
    3       2     sequence counter (u16, wraps mod 2^16)
    5       1     payload length N
    6       N     payload (see FIELD_SPECS)
    6+N     2     CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflect)
                  computed over bytes 1 .. 5+N (everything after the SOF)

Command codes: SET_PATTERN=0x01, STOP_CHANNEL=0x02, STOP_ALL=0x03,
SET_AMPLITUDE=0x04, PING=0x05, ACK=0x06, NACK=0x07, TELEMETRY=0x08.

Safety is enforced at this layer too: amplitude fields cannot encode more
than 3000 uA in either direction. The decoder accepts arbitrary bytes and
only ever raises DecodeError subclasses; the streaming decoder resyncs on
the next SOF after garbage.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import (
    BadCrc, BadSof, FieldOutOfRange, Truncated, UnknownCommand,
)

SOF = 0xA5
VERSION = 1

MAX_AMPLITUDE_UA = 3000
MAX_FREQUENCY_CENTI_HZ = 1_000_000   # 10 kHz
MAX_CHANNEL = 14
NO_ACTIVE_CHANNEL = 0xFF

COMMAND_CODES = {
    "SET_PATTERN": 0x01,
    "STOP_CHANNEL": 0x02,
    "STOP_ALL": 0x03,
    "SET_AMPLITUDE": 0x04,
    "PING": 0x05,
    "ACK": 0x06,
    "NACK": 0x07,
    "TELEMETRY": 0x08,
}
CODE_COMMANDS = {v: k for k, v in COMMAND_CODES.items()}

# (field name, struct code, min, max) per command; order is the wire order.
FIELD_SPECS = {
    "SET_PATTERN": (
        ("channel", "B", 0, MAX_CHANNEL),
        ("frequency_centi_hz", "I", 1, MAX_FREQUENCY_CENTI_HZ),
        ("duty_basis_points", "H", 1, 9999),
        ("amplitude_micro_amp", "H", 0, MAX_AMPLITUDE_UA),
        ("duration_ms", "I", 1, 0xFFFFFFFF),
    ),
    "STOP_CHANNEL": (("channel", "B", 0, MAX_CHANNEL),),
    "STOP_ALL": (),
    "SET_AMPLITUDE": (("amplitude_micro_amp", "H", 0, MAX_AMPLITUDE_UA),),
    "PING": (),
    "ACK": (("acked_sequence", "H", 0, 0xFFFF),),
    "NACK": (
        ("nacked_sequence", "H", 0, 0xFFFF),
        ("error_code", "B", 0, 0xFF),
    ),
    "TELEMETRY": (
        ("battery_millivolt", "H", 0, 0xFFFF),
        ("realized_current_micro_amp", "H", 0, 0xFFFF),
        ("active_channel", "B", 0, 0xFF),
    ),
}

_STRUCTS = {cmd: struct.Struct("<" + "".join(f[1] for f in spec))
            for cmd, spec in FIELD_SPECS.items()}

_CRC_TABLE = []
for _byte in range(256):
    _crc = _byte << 8
    for _ in range(8):
        _crc = ((_crc << 1) ^ 0x1021) & 0xFFFF if _crc & 0x8000 else (_crc << 1) & 0xFFFF
    _CRC_TABLE.append(_crc)


def crc16(data: bytes, crc: int = 0xFFFF) -> int:
    """CRC-16/CCITT-FALSE (check value of b"123456789" is 0x29B1)."""
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[((crc >> 8) ^ b) & 0xFF]
    return crc


@dataclass(frozen=True)
class Frame:
    command: str
    sequence: int
    payload: dict = field(default_factory=dict)
    version: int = VERSION


def _check_fields(frame: Frame) -> tuple:
    spec = FIELD_SPECS.get(frame.command)
    if spec is None:
        raise UnknownCommand(f"unknown command {frame.command!r}")
    values = []
    for name, _, lo, hi in spec:
        if name not in frame.payload:
            raise FieldOutOfRange(f"{frame.command}: missing field {name}")
        v = frame.payload[name]
        if not isinstance(v, int) or not (lo <= v <= hi):
            raise FieldOutOfRange(f"{frame.command}.{name}={v!r} outside [{lo}, {hi}]")
        values.append(v)
    extra = set(frame.payload) - {f[0] for f in spec}
    if extra:
        raise FieldOutOfRange(f"{frame.command}: unexpected fields {sorted(extra)}")
    return tuple(values)


def encode(frame: Frame) -> bytes:
    if frame.version != VERSION:
        raise FieldOutOfRange(f"unsupported version {frame.version}")
    if not isinstance(frame.sequence, int) or not (0 <= frame.sequence <= 0xFFFF):
        raise FieldOutOfRange(f"sequence {frame.sequence!r} outside u16")
    values = _check_fields(frame)
    payload = _STRUCTS[frame.command].pack(*values)
    body = bytes([VERSION, COMMAND_CODES[frame.command]]) \
        + frame.sequence.to_bytes(2, "little") \
        + bytes([len(payload)]) + payload
    return bytes([SOF]) + body + crc16(body).to_bytes(2, "little")


def decode_with_length(data: bytes) -> tuple:
    """Parse one frame at the start of the buffer.

    Returns (frame, consumed_bytes); encode(frame) reproduces exactly
    data[:consumed_bytes]. Only DecodeError subclasses are raised.
    """
    if len(data) < 1:
        raise Truncated("empty input")
    if data[0] != SOF:
        raise BadSof(f"expected SOF 0x{SOF:02X}, got 0x{data[0]:02X}")
    if len(data) < 6:
        raise Truncated(f"header needs 6 bytes, have {len(data)}")
    version = data[1]
    code = data[2]
    sequence = int.from_bytes(data[3:5], "little")
    n = data[5]
    total = 6 + n + 2
    if len(data) < total:
        raise Truncated(f"frame needs {total} bytes, have {len(data)}")
    body = data[1:6 + n]
    got_crc = int.from_bytes(data[6 + n:total], "little")
    if crc16(bytes(body)) != got_crc:
        raise BadCrc(f"crc mismatch on {total}-byte frame")
    if version != VERSION:
        raise FieldOutOfRange(f"unsupported version {version}")
    command = CODE_COMMANDS.get(code)
    if command is None:
        raise UnknownCommand(f"unknown command code 0x{code:02X}")
    spec = FIELD_SPECS[command]
    st = _STRUCTS[command]
    if n != st.size:
        raise FieldOutOfRange(
            f"{command}: payload length {n} != {st.size}")
    values = st.unpack(bytes(data[6:6 + n]))
    payload = {}
    for (name, _, lo, hi), v in zip(spec, values):
        if not (lo <= v <= hi):
            raise FieldOutOfRange(f"{command}.{name}={v} outside [{lo}, {hi}]")
        payload[name] = int(v)
    return Frame(command=command, sequence=sequence, payload=payload), total


def decode(data: bytes) -> Frame:
    """Parse the frame at the start of the buffer (trailing bytes ignored;
    use StreamDecoder for continuous input)."""
    return decode_with_length(data)[0]


class StreamDecoder:
    """Incremental decoder for a lossy byte stream (single consumer).

    feed() returns the frames completed by the new chunk. Garbage and
    corrupt frames are skipped by resynchronizing on the next SOF byte;
    per-error counts are kept in `error_counts`.
    """

    def __init__(self):
        self._buf = bytearray()
        self.error_counts: dict = {}

    def feed(self, chunk: bytes) -> list:
        self._buf.extend(chunk)
        frames = []
        while True:
            start = self._buf.find(bytes([SOF]))
            if start < 0:
                self._buf.clear()
                return frames
            if start > 0:
                del self._buf[:start]
            try:
                frame, used = decode_with_length(bytes(self._buf))
            except Truncated:
                return frames
            except Exception as exc:
                name = type(exc).__name__
                self.error_counts[name] = self.error_counts.get(name, 0) + 1
                del self._buf[:1]
                continue
            frames.append(frame)
            del self._buf[:used]


def pattern_frame(channel: int, frequency_hz: float, duty: float,
                  amplitude_ma: float, duration_ms: float, sequence: int) -> Frame:
    """SET_PATTERN frame from physical units (fixed-point wire fields)."""
    return Frame(command="SET_PATTERN", sequence=sequence, payload={
        "channel": channel,
        "frequency_centi_hz": round(frequency_hz * 100),
        "duty_basis_points": round(duty * 10_000),
        "amplitude_micro_amp": round(amplitude_ma * 1000),
        "duration_ms": round(duration_ms),
    })
