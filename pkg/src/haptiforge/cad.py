"""CAD export of a LayoutDesign: layered SVG and lossless JSON.

SVG user units are millimeters (1 cm = 10 units) with the y axis flipped to
screen convention. The JSON document ("schema": "layout/1") round-trips a
LayoutDesign bit-exactly: floats are serialized with repr precision, and
import followed by export reproduces the original bytes.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import DegenerateInput
from .layout import (
    ArcSeg, ConnectorSpec, ElectrodeSite, HandContour, LayoutDesign, LineSeg,
    TraceRoute,
)

SCHEMA = "layout/1"
MM_PER_CM = 10.0
SVG_PAD_CM = 0.5


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def layout_to_dict(layout: LayoutDesign) -> dict:
    segs = []
    for seg in layout.contour.segments:
        if isinstance(seg, LineSeg):
            segs.append({"kind": "line",
                         "p0": list(map(float, seg.p0)),
                         "p1": list(map(float, seg.p1))})
        else:
            segs.append({"kind": "arc",
                         "center": list(map(float, seg.center)),
                         "radius": float(seg.radius),
                         "start_angle": float(seg.start_angle),
                         "end_angle": float(seg.end_angle)})
    return {
        "schema": SCHEMA,
        "units": "cm",
        "metadata": layout.metadata,
        "contour": segs,
        "electrodes": [
            {"id": s.id, "role": s.role, "region": s.region,
             "center": list(map(float, s.center)), "diameter_cm": float(s.diameter)}
            for s in layout.sites
        ],
        "traces": [
            {"electrode_id": r.electrode_id,
             "points": [list(map(float, p)) for p in r.points],
             "width_cm": float(r.width)}
            for r in layout.routes
        ],
        "connector": {
            "pins": [list(map(float, p)) for p in layout.connector.pins],
            "pitch_cm": float(layout.connector.pitch),
        },
    }


def layout_from_dict(doc: dict) -> LayoutDesign:
    if doc.get("schema") != SCHEMA:
        raise DegenerateInput(f"unsupported layout schema {doc.get('schema')!r}")
    segs = []
    for s in doc["contour"]:
        if s["kind"] == "line":
            segs.append(LineSeg(np.array(s["p0"]), np.array(s["p1"])))
        elif s["kind"] == "arc":
            segs.append(ArcSeg(center=np.array(s["center"]), radius=s["radius"],
                               start_angle=s["start_angle"], end_angle=s["end_angle"]))
        else:
            raise DegenerateInput(f"unknown contour segment kind {s['kind']!r}")
    sites = tuple(
        ElectrodeSite(id=e["id"], role=e["role"], region=e["region"],
                      center=np.array(e["center"]), diameter=e["diameter_cm"])
        for e in doc["electrodes"]
    )
    routes = tuple(
        TraceRoute(electrode_id=t["electrode_id"],
                   points=np.array(t["points"]), width=t["width_cm"])
        for t in doc["traces"]
    )
    connector = ConnectorSpec(pins=np.array(doc["connector"]["pins"]),
                              pitch=doc["connector"]["pitch_cm"])
    return LayoutDesign(contour=HandContour(segments=tuple(segs)), sites=sites,
                        routes=routes, connector=connector,
                        metadata=doc.get("metadata", {}))


def export_json(layout: LayoutDesign) -> bytes:
    return (json.dumps(layout_to_dict(layout), sort_keys=True,
                       separators=(",", ": "), indent=1) + "\n").encode()


def import_json(data: bytes) -> LayoutDesign:
    return layout_from_dict(json.loads(data.decode()))


def export_svg(layout: LayoutDesign) -> bytes:
    """Three-layer SVG: #contour path, #electrodes circles, #traces polylines."""
    poly = layout.contour.flatten()
    min_x = float(poly[:, 0].min()) - SVG_PAD_CM
    max_x = float(poly[:, 0].max()) + SVG_PAD_CM
    min_y = float(poly[:, 1].min()) - SVG_PAD_CM
    max_y = float(poly[:, 1].max()) + SVG_PAD_CM

    def tx(p) -> tuple:
        return ((p[0] - min_x) * MM_PER_CM, (max_y - p[1]) * MM_PER_CM)

    w = (max_x - min_x) * MM_PER_CM
    h = (max_y - min_y) * MM_PER_CM

    parts = []
    start = layout.contour.segments[0].start
    d = [f"M {_fmt(tx(start)[0])} {_fmt(tx(start)[1])}"]
    for seg in layout.contour.segments:
        if isinstance(seg, LineSeg):
            x, y = tx(seg.p1)
            d.append(f"L {_fmt(x)} {_fmt(y)}")
        else:
            r = seg.radius * MM_PER_CM
            x, y = tx(seg.end)
            large = 1 if seg.sweep > math.pi else 0
            # CCW in cm coordinates is CW on the flipped SVG y axis
            d.append(f"A {_fmt(r)} {_fmt(r)} 0 {large} 0 {_fmt(x)} {_fmt(y)}")
    d.append("Z")
    parts.append('<g id="contour" fill="none" stroke="black" stroke-width="0.3">')
    parts.append(f'<path d="{" ".join(d)}"/>')
    parts.append("</g>")

    parts.append('<g id="electrodes" fill="none" stroke="black" stroke-width="0.3">')
    for s in layout.sites:
        x, y = tx(s.center)
        r = s.radius * MM_PER_CM
        parts.append(
            f'<circle id="electrode-{s.id}" cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}"/>')
    parts.append("</g>")

    parts.append('<g id="traces" fill="none" stroke="black" stroke-linejoin="round">')
    for route in layout.routes:
        pts = " ".join(f"{_fmt(tx(p)[0])},{_fmt(tx(p)[1])}" for p in route.points)
        width = route.width * MM_PER_CM
        parts.append(
            f'<polyline id="trace-{route.electrode_id}" points="{pts}" '
            f'stroke-width="{_fmt(width)}"/>')
    parts.append("</g>")

    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w)}mm" '
        f'height="{_fmt(h)}mm" viewBox="0 0 {_fmt(w)} {_fmt(h)}">\n'
        + "\n".join(parts) + "\n</svg>\n"
    )
    return svg.encode()


def export_cad(layout: LayoutDesign, fmt: str) -> bytes:
    if fmt == "svg":
        return export_svg(layout)
    if fmt == "json":
        return export_json(layout)
    raise DegenerateInput(f"unknown CAD format {fmt!r}")
