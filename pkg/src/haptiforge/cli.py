"""Command line entry points: design, simulate, session, serve.

Exit codes: 0 on success, 2 with the typed error name on stderr for any
pipeline failure. The HAPTIFORGE_MAX_MA environment variable can lower the
amplitude cap but never raise it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import cad, charts
from .errors import HaptiforgeError
from .fileio import landmark_hash, load_landmarks, load_mesh
from .hand_geometry import compute_finger_metrics, fit_plane, flatten_to_2d, \
    project_vertices
from .layout import synthesize_layout
from .perception import IntensitySurface, synthetic_default_surface
from .runtime import DeviceRuntime
from .session import Session, SessionConfig, calibrate_amplitude
from .stimulator import (
    PulsePattern, SafetyLimits, build_schedule, events_to_json,
    simulate as simulate_schedule,
)


def effective_limits(args_limits: str | None) -> SafetyLimits:
    kwargs = {}
    if args_limits:
        doc = json.loads(Path(args_limits).read_text())
        kwargs = {k: doc[k] for k in
                  ("max_amplitude_ma", "supply_voltage_v", "dead_time_us")
                  if k in doc}
    limits = SafetyLimits(**kwargs)
    env = os.environ.get("HAPTIFORGE_MAX_MA")
    if env:
        # the env var may only lower the cap
        cap = min(limits.max_amplitude_ma, float(env))
        limits = SafetyLimits(max_amplitude_ma=cap,
                              supply_voltage_v=limits.supply_voltage_v,
                              dead_time_us=limits.dead_time_us)
    return limits


def design_pipeline(landmarks_path, mesh_path):
    landmarks = load_landmarks(landmarks_path)
    mesh = load_mesh(mesh_path)
    plane = fit_plane(landmarks)
    projected = project_vertices(mesh, plane)
    flat = flatten_to_2d(projected, plane, landmarks)
    layout = synthesize_layout(flat, source_hash=landmark_hash(landmarks))
    metrics = compute_finger_metrics(landmarks)
    return layout, metrics


def cmd_design(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    layout, metrics = design_pipeline(args.landmarks, args.mesh)
    (out / "layout.json").write_bytes(cad.export_json(layout))
    (out / "layout.svg").write_bytes(cad.export_svg(layout))
    (out / "metrics.json").write_text(
        json.dumps(metrics.to_dict(), sort_keys=True, indent=1) + "\n")
    print(f"wrote layout.json, layout.svg, metrics.json to {out}")
    return 0


def cmd_simulate(args) -> int:
    limits = effective_limits(args.limits)
    docs = json.loads(Path(args.patterns).read_text())
    patterns = [PulsePattern(channel=int(d["channel"]),
                             frequency_hz=float(d["frequency_hz"]),
                             duty=float(d["duty"]),
                             amplitude_ma=float(d["amplitude_ma"]),
                             duration_ms=float(d["duration_ms"]))
                for d in docs]
    events = build_schedule(patterns, limits)
    trace = simulate_schedule(events, patterns, limits, dt_us=args.dt_us)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "waveform.csv").write_text(trace.to_csv())
    (out / "waveform.svg").write_bytes(charts.waveform_strip_svg(trace))
    (out / "schedule.json").write_text(
        json.dumps(events_to_json(events), indent=1) + "\n")
    print(f"wrote waveform.csv, waveform.svg, schedule.json to {out}")
    return 0


def cmd_session_run(args) -> int:
    doc = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.seed is not None:
        doc["seed"] = args.seed
    config = SessionConfig.from_dict(doc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    session = Session.create(config, path=out / "session.jsonl")

    if args.ratings:
        ratings = [int(tok) for tok in
                   Path(args.ratings).read_text().split()]
    else:
        ratings = None

    while not session.done:
        f, d = session.current_trial()
        k = session.cursor
        if ratings is not None:
            if k >= len(ratings):
                print(f"ratings file exhausted at trial {k}", file=sys.stderr)
                return 2
            rating = ratings[k]
        else:
            prompt = (f"trial {k + 1}/{len(session.plan)}: {f:g} Hz, "
                      f"duty {d * 100:g}% -> rating 1-5? ")
            rating = int(input(prompt))
        session.record_rating(k, rating)

    (out / "ratings.csv").write_text(session.to_csv())
    surface = session.fit_surface(monotone=True)
    (out / "surface.json").write_text(
        json.dumps(surface.to_dict(), indent=1) + "\n")
    print(f"session complete: {len(session.records)} ratings -> {out}")
    return 0


def cmd_calibrate(args) -> int:
    responses = Path(args.responses).read_text().split()
    result = calibrate_amplitude(responses)
    print(f"{result:.2f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    limits = effective_limits(args.limits)
    layout_doc = None
    if args.landmarks and args.mesh:
        layout, _ = design_pipeline(args.landmarks, args.mesh)
        layout_doc = cad.layout_to_dict(layout)
    surface = synthetic_default_surface()
    if args.surface:
        surface = IntensitySurface.from_dict(
            json.loads(Path(args.surface).read_text()))
    runtime = DeviceRuntime(limits=limits, surface=surface, layout_doc=layout_doc)
    app = create_app(runtime)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="haptiforge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="landmarks + mesh -> layout files")
    p.add_argument("--landmarks", required=True)
    p.add_argument("--mesh", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="pattern list -> waveform CSV + SVG")
    p.add_argument("--patterns", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dt-us", type=float, default=1.0)
    p.add_argument("--limits")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("session", help="psychophysics session tools")
    ssub = p.add_subparsers(dest="session_command", required=True)
    pr = ssub.add_parser("run", help="run a rating session")
    pr.add_argument("--config", help="session config JSON")
    pr.add_argument("--out", required=True)
    pr.add_argument("--ratings", help="whitespace-separated ratings for scripted runs")
    pr.add_argument("--seed", type=int, help="override the config's shuffle seed")
    pr.set_defaults(func=cmd_session_run)
    pc = ssub.add_parser("calibrate", help="replay a staircase response file")
    pc.add_argument("--responses", required=True)
    pc.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="run the operator service")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--landmarks")
    p.add_argument("--mesh")
    p.add_argument("--limits")
    p.add_argument("--surface")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HaptiforgeError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"FileNotFound: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
