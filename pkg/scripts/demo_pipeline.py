#!/usr/bin/env python3
"""End-to-end demo on the bundled canonical hand.

Designs the layout, maps a six-contact grasp onto pulse patterns, builds
the exclusive schedule and renders the waveform artifacts into ./demo_out.
"""

import importlib.resources
import json
from pathlib import Path

from haptiforge import cad
from haptiforge.cli import design_pipeline
from haptiforge.interaction import ContactEvent, StimulusPlan, apply_event
from haptiforge.perception import synthetic_default_surface
from haptiforge.charts import waveform_strip_svg
from haptiforge.stimulator import SafetyLimits, build_schedule, simulate

OUT = Path("demo_out")
DATA = importlib.resources.files("haptiforge").joinpath("data")


def main() -> None:
    OUT.mkdir(exist_ok=True)
    layout, metrics = design_pipeline(DATA / "canonical_landmarks.json",
                                      DATA / "canonical_mesh.json")
    (OUT / "layout.svg").write_bytes(cad.export_svg(layout))
    (OUT / "layout.json").write_bytes(cad.export_json(layout))
    (OUT / "metrics.json").write_text(
        json.dumps(metrics.to_dict(), indent=1, sort_keys=True) + "\n")

    surface = synthetic_default_surface()
    plan = StimulusPlan()
    grasp = [(0, 2.0), (3, 3.0), (6, 2.0), (9, 2.0), (12, 2.0), (14, 1.5)]
    for electrode, level in grasp:
        plan = apply_event(plan, ContactEvent(electrode=electrode, level=level,
                                              kind="begin", timestamp_ms=0.0),
                           surface, amplitude_ma=1.0)
    limits = SafetyLimits()
    patterns = plan.active_patterns()
    events = build_schedule(patterns, limits)
    trace = simulate(events, patterns, limits, dt_us=5.0)
    (OUT / "grasp_waveform.svg").write_bytes(waveform_strip_svg(trace))
    (OUT / "grasp_waveform.csv").write_text(trace.to_csv())
    print(f"layout + grasp artifacts written to {OUT}/")
    for p in patterns:
        print(f"  ch{p.channel:2d}: {p.frequency_hz:7.2f} Hz  "
              f"duty {p.duty * 100:5.2f} %  {p.amplitude_ma} mA")


if __name__ == "__main__":
    main()
