"""Acceptance criteria, one test per criterion (pytest -v prints one
pass/fail line each). Tolerances are pinned here, not configurable.

Oracles are independent re-implementations: SVD plane fit, scalar segment
intersection, vectorized ray casting, bitwise CRC, exhaustive enumeration.
"""

import itertools
import json
import math
import random
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

import haptiforge.protocol as protocol
from haptiforge.cli import main as cli_main
from haptiforge.errors import DecodeError, FieldOutOfRange, HaptiforgeError
from haptiforge.hand_geometry import (
    LandmarkSet, fit_plane, flatten_to_2d, project_vertices,
)
from haptiforge.layout import synthesize_layout
from haptiforge.perception import (
    RatingRecord, STUDY_DUTIES, STUDY_FREQUENCIES_HZ, fit_surface,
)
from haptiforge.runtime import DeviceRuntime
from haptiforge.service import create_app
from haptiforge.session import Session, SessionConfig, calibrate_amplitude
from haptiforge.stimulator import (
    PulsePattern, SafetyLimits, build_schedule, output_current, simulate,
    validate_pattern,
)

from conftest import data_text, random_hand_landmarks
from test_layout import oracle_contour_polygon, oracle_segments_intersect

MODULE_T0 = time.perf_counter()
LIMITS = SafetyLimits()


# -- independent oracle helpers ------------------------------------------------

def svd_normal(points):
    c = points.mean(axis=0)
    return np.linalg.svd(points - c)[2][-1]


def rays_inside(points, polygon):
    """Vectorized ray-cast containment, written fresh for this module."""
    px = points[:, 0][:, None]
    py = points[:, 1][:, None]
    ax, ay = polygon[:, 0][None, :], polygon[:, 1][None, :]
    bx, by = np.roll(polygon[:, 0], -1)[None, :], np.roll(polygon[:, 1], -1)[None, :]
    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = ax + (py - ay) * (bx - ax) / (by - ay)
    return ((straddle & (px < xcross)).sum(axis=1) % 2).astype(bool)


def bitwise_crc(data: bytes) -> int:
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) & 0xFFFF if crc & 0x8000 else \
                (crc << 1) & 0xFFFF
    return crc


def events_to_spans(events):
    opened = {}
    spans = []
    for e in events:
        if e.action == "on":
            opened[e.channel] = e.time_us
        elif e.action == "off" and e.channel in opened:
            spans.append((opened.pop(e.channel), e.time_us, e.channel))
    return sorted(spans)


def random_frame(rng: random.Random) -> protocol.Frame:
    command = rng.choice(list(protocol.COMMAND_CODES))
    payload = {name: rng.randint(lo, hi)
               for name, _, lo, hi in protocol.FIELD_SPECS[command]}
    return protocol.Frame(command=command, sequence=rng.randint(0, 0xFFFF),
                          payload=payload)


# -- criteria -------------------------------------------------------------------

def test_c01_plane_fit_matches_svd_oracle_1000_sets():
    rng = np.random.default_rng(101)
    cases = []
    for _ in range(1000):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        basis = np.linalg.svd(np.outer(n, n))[0][:, 1:]
        pts = rng.uniform(-6, 6, (21, 2)) @ basis.T \
            + rng.uniform(-0.2, 0.2, (21, 1)) * n \
            + rng.uniform(-10, 10, 3)
        cases.append(pts)
    elapsed = 0.0
    for pts in cases:
        t0 = time.perf_counter()
        plane = fit_plane(LandmarkSet(points=pts))
        elapsed += time.perf_counter() - t0
        want = svd_normal(pts)
        # chord-based angle resolves below the acos quantization floor
        chord = min(np.linalg.norm(plane.normal - want),
                    np.linalg.norm(plane.normal + want))
        angle = 2.0 * math.asin(min(1.0, chord / 2.0))
        assert angle < 1e-9
    assert elapsed < 1.0


def test_c02_projection_law_and_idempotence(canonical_mesh):
    rng = np.random.default_rng(202)
    for _ in range(100):
        lm = random_hand_landmarks(rng)
        plane = fit_plane(lm)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(0, 2 * math.pi)
        K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]],
                      [-axis[1], axis[0], 0]])
        R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
        from haptiforge.hand_geometry import HandMesh
        mesh = HandMesh(vertices=canonical_mesh.vertices @ R.T
                        + rng.uniform(-5, 5, 3), faces=canonical_mesh.faces)
        projected = project_vertices(mesh, plane)
        residual = projected.vertices @ plane.normal + plane.d
        assert np.abs(residual).max() < 1e-9
        again = project_vertices(projected, plane)
        assert np.abs(again.vertices - projected.vertices).max() < 1e-12


def test_c03_layout_validity_over_200_hands():
    rng = np.random.default_rng(303)
    successes = 0
    for _ in range(200):
        lm = random_hand_landmarks(rng)
        try:
            flat = flatten_to_2d(None, fit_plane(lm), lm)
            layout = synthesize_layout(flat)
        except HaptiforgeError:
            continue  # typed failures are allowed; anything else propagates
        successes += 1
        stim = [s for s in layout.sites if s.role == "stimulation"]
        vgnd = [s for s in layout.sites if s.role == "vgnd"]
        assert len(stim) == 15 and len(vgnd) == 1
        # brute-force all-pairs route crossing check
        for i in range(len(layout.routes)):
            for j in range(i + 1, len(layout.routes)):
                a, b = layout.routes[i].points, layout.routes[j].points
                for s in range(len(a) - 1):
                    for t in range(len(b) - 1):
                        assert not oracle_segments_intersect(
                            a[s], a[s + 1], b[t], b[t + 1])
        # containment: 16 boundary samples per disc, arcs flattened <= 0.01 cm
        polygon = oracle_contour_polygon(layout.contour, step_deg=6.0)
        angles = np.linspace(0, 2 * math.pi, 16, endpoint=False)
        ring = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        samples = np.concatenate(
            [s.center + s.radius * ring for s in layout.sites])
        assert rays_inside(samples, polygon).all()
        route_pts = np.concatenate([r.points for r in layout.routes])
        assert rays_inside(route_pts, polygon).all()
    assert successes >= 150  # generator aims for plausible hands


def test_c04_scheduler_exclusivity_500_random_sets():
    rng = np.random.default_rng(404)
    t0 = time.perf_counter()
    checked = 0
    while checked < 500:
        n = int(rng.integers(1, 8))
        channels = rng.permutation(15)[:n]
        freqs = rng.choice([10.0, 25.0, 50.0, 100.0, 500.0], size=n)
        duties = rng.uniform(0.01, 0.9 / n, size=n)
        patterns = [
            PulsePattern(channel=int(ch), frequency_hz=float(f),
                         duty=float(d), amplitude_ma=1.0, duration_ms=1000.0)
            for ch, f, d in zip(channels, freqs, duties)
        ]
        try:
            events = build_schedule(patterns, LIMITS)
        except HaptiforgeError:
            continue
        checked += 1
        trace = simulate(events, patterns, LIMITS, dt_us=1.0)
        assert trace.duration_us >= 1_000_000.0
        assert int(trace.active_count_per_tick().max()) <= 1
        spans = events_to_spans(events)
        for (a0, a1, ca), (b0, b1, cb) in zip(spans, spans[1:]):
            assert b0 >= a1
            if ca != cb:
                assert b0 - a1 >= 1.5 - 1e-9
    assert time.perf_counter() - t0 < 60.0


def test_c05_duty_fidelity_on_study_grid():
    for f in STUDY_FREQUENCIES_HZ:
        for duty in STUDY_DUTIES:
            p = PulsePattern(channel=0, frequency_hz=f, duty=duty,
                             amplitude_ma=1.0, duration_ms=400.0)
            events = build_schedule([p], LIMITS)
            trace = simulate(events, [p], LIMITS, dt_us=1.0)
            slack = trace.dt_us / (1e6 / f) + LIMITS.dead_time_us * f / 1e6
            assert abs(trace.on_fraction(0) - duty) <= slack
    # the 50 Hz / 10 % case is exact: 2 ms on per 20 ms period
    p = PulsePattern(channel=0, frequency_hz=50.0, duty=0.10,
                     amplitude_ma=1.0, duration_ms=100.0)
    spans = events_to_spans(build_schedule([p], LIMITS))
    assert len(spans) == 5
    for k, (on, off, _) in enumerate(spans):
        assert on == k * 20_000.0
        assert off - on == 2_000.0


def test_c06_no_api_path_exceeds_3ma():
    # pattern validation
    with pytest.raises(HaptiforgeError):
        validate_pattern(PulsePattern(channel=0, frequency_hz=50.0, duty=0.1,
                                      amplitude_ma=3.0001, duration_ms=10.0),
                         LIMITS)
    # codec: encode refuses, decode rejects
    with pytest.raises(FieldOutOfRange):
        protocol.encode(protocol.Frame(
            command="SET_AMPLITUDE", sequence=0,
            payload={"amplitude_micro_amp": 3001}))
    wire = bytearray(protocol.encode(protocol.Frame(
        command="SET_AMPLITUDE", sequence=0,
        payload={"amplitude_micro_amp": 3000})))
    wire[6:8] = (3001).to_bytes(2, "little")
    wire[-2:] = protocol.crc16(bytes(wire[1:-2])).to_bytes(2, "little")
    with pytest.raises(FieldOutOfRange):
        protocol.decode(bytes(wire))
    # service endpoints under adversarial inputs
    runtime = DeviceRuntime(limits=LIMITS)
    with TestClient(create_app(runtime)) as client:
        rng = random.Random(606)
        for _ in range(120):
            kind = rng.random()
            if kind < 0.4:
                client.post("/api/patterns", json={
                    "channel": rng.randrange(15),
                    "frequency_hz": rng.choice([10.0, 50.0, 500.0]),
                    "duty": rng.uniform(0.01, 0.5),
                    "amplitude_ma": rng.uniform(0.0, 6.0),
                    "duration_ms": 100.0})
            elif kind < 0.6:
                client.post("/api/amplitude",
                            json={"amplitude_ma": rng.uniform(0.0, 6.0)})
            else:
                client.post("/api/events", json={
                    "schema": "contact/1", "electrode": rng.randrange(15),
                    "level": rng.randint(1, 5),
                    "kind": rng.choice(["begin", "update", "end"]),
                    "timestamp_ms": 0.0})
            state = client.get("/api/state").json()
            assert state["calibrated_amplitude_ma"] <= 3.0
            assert all(p["amplitude_ma"] <= 3.0
                       for p in state["plan"]["patterns"].values())
            assert all(reg["amplitude_micro_amp"] <= 3000
                       for reg in runtime.link.device.patterns.values())
    # calibration staircase, exhaustive over response sequences up to 10
    options = ("comfortable", "too-strong", "imperceptible")
    for n in range(1, 11):
        for seq in itertools.product(options, repeat=n):
            try:
                result = calibrate_amplitude(list(seq))
            except HaptiforgeError:
                continue
            assert result <= 3.0
    # compliance clamp at three resistor settings, against Ohm's law
    for r_load in (10_000.0, 100_000.0, 200_000.0):
        delivered = output_current(5.0, 1000.0, r_load, LIMITS)
        analytic = min(5.0 / 1000.0, 90.0 / (r_load + 1000.0), 0.003) * 1000.0
        assert delivered == pytest.approx(analytic, rel=1e-12)


def test_c07_protocol_round_trip_crc_and_fuzz():
    assert bitwise_crc(b"123456789") == 0x29B1
    assert protocol.crc16(b"123456789") == 0x29B1
    rng = random.Random(707)
    for _ in range(100_000):
        frame = random_frame(rng)
        wire = protocol.encode(frame)
        assert protocol.decode(wire) == frame
    crashes = 0
    accepted = 0
    for k in range(1_000_000):
        if k % 3 == 0:
            blob = bytearray(protocol.encode(random_frame(rng)))
            for _ in range(rng.randrange(0, 3)):
                blob[rng.randrange(len(blob))] = rng.randrange(256)
            blob = bytes(blob)
        else:
            blob = bytes(rng.randrange(256)
                         for _ in range(rng.randrange(0, 20)))
        try:
            frame, used = protocol.decode_with_length(blob)
        except DecodeError:
            continue
        except Exception:
            crashes += 1
            continue
        accepted += 1
        assert protocol.encode(frame) == blob[:used]
    assert crashes == 0
    assert accepted > 0


def test_c08_perception_surface_means_monotone_ordering():
    rng = np.random.default_rng(808)

    def true_level(f, d):
        fn = (math.log10(f) - 1.0) / (math.log10(500.0) - 1.0)
        dn = (d - 0.02) / 0.48
        return 1.0 + 4.0 * (0.5 * dn + 0.5 * (1.0 - fn))

    records = []
    sums = {}
    trial = 0
    for f in STUDY_FREQUENCIES_HZ:
        for d in STUDY_DUTIES:
            for _ in range(3):
                rating = int(np.clip(round(true_level(f, d)
                                           + rng.integers(-1, 2)), 1, 5))
                records.append(RatingRecord(participant_id="a", trial=trial,
                                            frequency_hz=f, duty=d,
                                            rating=rating))
                sums.setdefault((f, d), []).append(rating)
                trial += 1
    flat_surface = fit_surface(records)
    for i, f in enumerate(STUDY_FREQUENCIES_HZ):
        for j, d in enumerate(STUDY_DUTIES):
            assert flat_surface.grid[i, j] == np.mean(sums[(f, d)])
    mono = fit_surface(records, monotone=True)
    g = mono.grid
    assert np.all(g[:-1, :] >= g[1:, :] - 1e-9)
    assert np.all(g[:, :-1] <= g[:, 1:] + 1e-9)
    # the paper-style ordering survives the fit: corner-to-corner dominance
    assert g[0, -1] == g.max()   # lowest frequency, largest duty: strongest
    assert g[-1, 0] == g.min()   # highest frequency, smallest duty: weakest


def test_c09_session_protocol_and_aggregation(tmp_path):
    plan_a = Session.create(SessionConfig(seed=909)).plan
    plan_b = Session.create(SessionConfig(seed=909)).plan
    assert plan_a.trials == plan_b.trials
    assert len(plan_a) == 75
    counts = {}
    for combo in plan_a.trials:
        counts[combo] = counts.get(combo, 0) + 1
    assert len(counts) == 25 and all(v == 3 for v in counts.values())

    session = Session.create(SessionConfig(seed=910), path=tmp_path / "s.jsonl")
    rng = np.random.default_rng(911)
    while not session.done:
        session.record_rating(session.cursor, int(rng.integers(1, 6)))
    surface = session.fit_surface()
    sums = {}
    for line in session.to_csv().strip().splitlines()[1:]:
        pid, trial, f, d_pct, rating = line.split(",")
        sums.setdefault((float(f), float(d_pct) / 100.0), []).append(int(rating))
    for i, f in enumerate(surface.frequencies_hz):
        for j, d in enumerate(surface.duties):
            assert surface.grid[i, j] == pytest.approx(
                float(np.mean(sums[(f, d)])), abs=1e-12)


def test_c10_end_to_end_design_and_service(tmp_path):
    landmarks = tmp_path / "landmarks.json"
    mesh = tmp_path / "mesh.json"
    landmarks.write_text(data_text("canonical_landmarks.json"))
    mesh.write_text(data_text("canonical_mesh.json"))
    out1, out2 = tmp_path / "d1", tmp_path / "d2"
    assert cli_main(["design", "--landmarks", str(landmarks), "--mesh",
                     str(mesh), "--out", str(out1)]) == 0
    assert cli_main(["design", "--landmarks", str(landmarks), "--mesh",
                     str(mesh), "--out", str(out2)]) == 0
    for name in ("layout.json", "layout.svg", "metrics.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    layout_doc = json.loads((out1 / "layout.json").read_text())
    runtime = DeviceRuntime(limits=LIMITS, layout_doc=layout_doc)
    with TestClient(create_app(runtime)) as client:
        fetched = client.get("/api/layout").json()
        assert fetched == layout_doc
        # contact events -> plan -> schedule -> waveform, invariants verified
        for electrode, level in ((0, 2), (3, 3), (6, 2), (9, 2), (12, 2), (14, 2)):
            r = client.post("/api/events", json={
                "schema": "contact/1", "electrode": electrode, "level": level,
                "kind": "begin", "timestamp_ms": 0.0})
            assert r.status_code == 200
        state = client.get("/api/state").json()
        assert len(state["plan"]["patterns"]) == 6
        for ch, pattern in state["plan"]["patterns"].items():
            assert pattern["amplitude_ma"] <= 3.0
            assert state["schedule"][ch]["realized_duty"] == pytest.approx(
                pattern["duty"], abs=1e-2)
        wf = client.get("/api/waveform",
                        params={"duration_ms": 100.0, "dt_us": 1.0}).json()
        assert wf["exclusive"] is True
        assert set(wf["channels"]) == set(state["plan"]["patterns"])
        revisions = [e["revision"] for e in runtime.events_since(0)]
        assert revisions == sorted(revisions)
    # the acceptance module itself stays well inside the 5 minute budget
    assert time.perf_counter() - MODULE_T0 < 300.0
