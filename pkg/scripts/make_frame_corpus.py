#!/usr/bin/env python3
"""Regenerate the golden wire-format corpus (data/frame_corpus.hex).

One frame per line: lowercase hex, a space, the command name. The corpus
pins the byte layout; tests decode each line, re-encode it, and check the
CRC against an independent bitwise implementation.
"""

from pathlib import Path

from haptiforge import protocol
from haptiforge.protocol import Frame, encode

OUT = Path(__file__).resolve().parents[1] / "src" / "haptiforge" / "data" / "frame_corpus.hex"

FRAMES = [
    Frame(command="PING", sequence=0),
    Frame(command="PING", sequence=0xBEEF),
    Frame(command="STOP_ALL", sequence=1),
    Frame(command="STOP_CHANNEL", sequence=2, payload={"channel": 14}),
    Frame(command="SET_AMPLITUDE", sequence=3, payload={"amplitude_micro_amp": 1000}),
    Frame(command="SET_AMPLITUDE", sequence=4, payload={"amplitude_micro_amp": 3000}),
    protocol.pattern_frame(0, 10.0, 0.02, 1.0, 1000, sequence=5),
    protocol.pattern_frame(3, 50.0, 0.10, 1.0, 1000, sequence=6),
    protocol.pattern_frame(7, 100.0, 0.25, 2.5, 250, sequence=7),
    protocol.pattern_frame(14, 500.0, 0.50, 3.0, 42, sequence=8),
    Frame(command="ACK", sequence=9, payload={"acked_sequence": 8}),
    Frame(command="NACK", sequence=10,
          payload={"nacked_sequence": 9, "error_code": 2}),
    Frame(command="TELEMETRY", sequence=11,
          payload={"battery_millivolt": 3700,
                   "realized_current_micro_amp": 990, "active_channel": 3}),
    Frame(command="TELEMETRY", sequence=12,
          payload={"battery_millivolt": 4100,
                   "realized_current_micro_amp": 0, "active_channel": 0xFF}),
]


def main() -> None:
    lines = ["# wire-format golden corpus: <hex frame> <command>"]
    for frame in FRAMES:
        lines.append(f"{encode(frame).hex()} {frame.command}")
    OUT.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(FRAMES)} frames to {OUT}")


if __name__ == "__main__":
    main()
