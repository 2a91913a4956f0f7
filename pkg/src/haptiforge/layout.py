"""Personalized device geometry: hand contour, electrode sites, trace routes.

Works entirely in the flattened 2D frame produced by hand_geometry (cm).
The contour is a stadium-per-finger comb closed by a palm box; electrodes sit
at fixed arc-length fractions of each finger chain; traces are comb-routed in
per-finger lanes, dropped through a palm corridor and fanned out to a wrist
connector in arrival order, which keeps the whole net planar.

All functions are pure and deterministic; a given FlatHand always yields the
same LayoutDesign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry2d as g2
from .errors import DegenerateInput, PlacementInfeasible, RoutingInfeasible
from .hand_geometry import FINGERS, FlatHand, PALM_ROOT, finger_root_index

# -- dimensional constants (cm) ----------------------------------------------

ELECTRODE_DIAMETER = 0.6
ELECTRODE_MIN_DIAMETER = 0.4
ELECTRODE_EDGE_CLEARANCE = 0.1   # disc to contour
ELECTRODE_PAIR_CLEARANCE = 0.1   # disc edge to disc edge

TRACE_WIDTH = 0.08
ROUTE_EDGE_CLEARANCE = 0.05      # trace centerline allowance to contour
ROUTE_DISC_CLEARANCE = 0.1       # trace to non-owner disc edge

LANDMARK_MARGIN = 0.3            # every landmark this far inside the contour
WRIST_MARGIN = 1.0               # wrist edge below the lowest landmark

FINGER_WIDTH_FACTOR = 0.55       # of the adjacent finger-root spacing
FINGER_WIDTH_MIN = 1.2
FINGER_WIDTH_MAX = 2.2

TIP_FRACTION = 0.92              # arc-length fractions along the finger chain
NEAR_PALM_FRACTION = 0.45
ROOT_FRACTION = 0.08
VGND_WRIST_OFFSET = 1.0

PIN_PITCH = 0.1
PIN_INSET = 0.4                  # connector line distance from the wrist edge

# Trace lanes sit this far off the finger axis: disc radius + disc clearance
# + half the trace width, so a lane clears every on-axis electrode.
LANE_OFFSET = ELECTRODE_DIAMETER / 2 + ROUTE_DISC_CLEARANCE + TRACE_WIDTH / 2
# Below the root site the lanes jog back toward the axis at staggered
# stations, so the palm drops leave from well inside the capsule silhouette
# instead of hugging the web corners.
LANE_TAIL_STATIONS = (0.40, 0.50, 0.60)   # shallow / axis / deep tails
LANE_EXIT_OFFSET = 0.20

N_STIM_CHANNELS = 15
VGND_ID = 15

STIM_FRACTIONS = (
    ("fingertip", TIP_FRACTION),
    ("near-palm", NEAR_PALM_FRACTION),
    ("finger-root", ROOT_FRACTION),
)


# -- domain types -------------------------------------------------------------

@dataclass(frozen=True)
class LineSeg:
    p0: np.ndarray
    p1: np.ndarray

    @property
    def start(self):
        return self.p0

    @property
    def end(self):
        return self.p1

    def flatten(self, tol: float) -> np.ndarray:
        return np.array([self.p0, self.p1], dtype=float)


@dataclass(frozen=True)
class ArcSeg:
    """Circular arc swept counter-clockwise from start_angle to end_angle."""

    center: np.ndarray
    radius: float
    start_angle: float
    end_angle: float

    def _point(self, ang: float) -> np.ndarray:
        return np.array([self.center[0] + self.radius * math.cos(ang),
                         self.center[1] + self.radius * math.sin(ang)])

    @property
    def start(self):
        return self._point(self.start_angle)

    @property
    def end(self):
        return self._point(self.end_angle)

    @property
    def sweep(self) -> float:
        sweep = self.end_angle - self.start_angle
        return sweep + 2 * math.pi if sweep <= 0 else sweep

    def flatten(self, tol: float) -> np.ndarray:
        return g2.flatten_arc(self.center, self.radius,
                              self.start_angle, self.end_angle, tol)


@dataclass(frozen=True)
class HandContour:
    """Closed CCW path of straight and arc segments."""

    segments: tuple

    def flatten(self, tol: float = g2.ARC_FLATTEN_TOL) -> np.ndarray:
        """Closed polygon approximation (no repeated closing point)."""
        pts = []
        for seg in self.segments:
            poly = seg.flatten(tol)
            if pts and np.linalg.norm(poly[0] - pts[-1]) < 1e-9:
                poly = poly[1:]
            pts.extend(poly)
        if len(pts) > 1 and np.linalg.norm(pts[-1] - pts[0]) < 1e-9:
            pts.pop()
        return np.array(pts)

    def is_closed(self, tol: float = 1e-6) -> bool:
        for a, b in zip(self.segments, self.segments[1:] + self.segments[:1]):
            if np.linalg.norm(a.end - b.start) > tol:
                return False
        return True


@dataclass(frozen=True)
class ElectrodeSite:
    id: int
    role: str              # "stimulation" | "vgnd"
    region: str            # fingertip | near-palm | finger-root | palm
    center: np.ndarray
    diameter: float = ELECTRODE_DIAMETER

    @property
    def radius(self) -> float:
        return self.diameter / 2


@dataclass(frozen=True)
class TraceRoute:
    electrode_id: int
    points: np.ndarray    # (k, 2) centerline from electrode center to pin
    width: float = TRACE_WIDTH


@dataclass(frozen=True)
class ConnectorSpec:
    pins: np.ndarray      # (n, 2), ordered by increasing y
    pitch: float = PIN_PITCH


@dataclass(frozen=True)
class LayoutDesign:
    contour: HandContour
    sites: tuple
    routes: tuple
    connector: ConnectorSpec
    metadata: dict = field(default_factory=dict)


# -- finger frames ------------------------------------------------------------

@dataclass(frozen=True)
class _Finger:
    index: int
    name: str
    chain: np.ndarray     # (4, 2) knuckle..tip
    width: float

    @property
    def root(self):
        return self.chain[0]

    @property
    def tip(self):
        return self.chain[3]

    @property
    def u(self):
        v = self.tip - self.root
        return v / np.linalg.norm(v)

    @property
    def perp(self):
        return g2.rot90(self.u)


def _finger_frames(flat: FlatHand) -> list:
    roots = np.array([flat.landmarks[finger_root_index(k)] for k in range(5)])
    fingers = []
    for k, name in enumerate(FINGERS):
        chain = flat.finger_chain(k)
        axis = chain[3] - chain[0]
        length = float(np.linalg.norm(axis))
        if length < 1.0:
            raise DegenerateInput(f"{name}: chain shorter than 1 cm")
        if axis[0] / length < 0.05:
            raise DegenerateInput(f"{name}: finger points toward the wrist")
        neighbor_d = []
        if k > 0:
            neighbor_d.append(float(np.linalg.norm(roots[k] - roots[k - 1])))
        if k < 4:
            neighbor_d.append(float(np.linalg.norm(roots[k] - roots[k + 1])))
        width = FINGER_WIDTH_FACTOR * float(np.mean(neighbor_d))
        width = min(FINGER_WIDTH_MAX, max(FINGER_WIDTH_MIN, width))
        # Containment overrides the estimate: the capsule must wrap every
        # chain landmark with the required margin even on a bent finger.
        u = axis / length
        rel = chain - chain[0]
        off = np.abs(u[0] * rel[:, 1] - u[1] * rel[:, 0])
        width = max(width, 2 * (float(off.max()) + LANDMARK_MARGIN + 0.05))
        fingers.append(_Finger(index=k, name=name, chain=chain, width=width))
    return fingers


# -- contour ------------------------------------------------------------------

def generate_contour(flat: FlatHand) -> HandContour:
    """Build the device outline: one stadium per finger joined to a palm box.

    Raises DegenerateInput when finger capsules overlap or cross (fingers
    crossed or touching in the source data) or when any landmark would end
    up within LANDMARK_MARGIN of the outline.
    """
    fingers = sorted(_finger_frames(flat), key=lambda f: float(f.root[1]))

    tip_order = [f.index for f in sorted(fingers, key=lambda f: float(f.tip[1]))]
    if tip_order != [f.index for f in fingers]:
        raise DegenerateInput("fingers crossed: tip order differs from root order")
    for a, b in zip(fingers, fingers[1:]):
        gap = g2.segment_segment_distance(a.root, a.tip, b.root, b.tip)
        if gap < (a.width + b.width) / 2 + 0.05:
            raise DegenerateInput(
                f"fingers overlap: {a.name} and {b.name} axes {gap:.2f} cm apart")

    wx = float(flat.landmarks[:, 0].min()) - WRIST_MARGIN
    segments = []
    first_a = fingers[0].root - fingers[0].perp * (fingers[0].width / 2)
    last_b = fingers[-1].root + fingers[-1].perp * (fingers[-1].width / 2)
    wx = min(wx, float(first_a[0]) - 0.5, float(last_b[0]) - 0.5)
    wrist_bottom = np.array([wx, first_a[1]])
    wrist_top = np.array([wx, last_b[1]])
    if wrist_top[1] - wrist_bottom[1] < 1.0:
        raise DegenerateInput("palm collapses: wrist edge shorter than 1 cm")

    segments.append(LineSeg(wrist_bottom, first_a))
    for i, f in enumerate(fingers):
        half = f.width / 2
        a = f.root - f.perp * half
        b = f.root + f.perp * half
        cap_in = f.tip - f.perp * half
        cap_out = f.tip + f.perp * half
        start_angle = math.atan2(-f.perp[1], -f.perp[0])
        segments.append(LineSeg(a, cap_in))
        segments.append(ArcSeg(center=f.tip.copy(), radius=half,
                               start_angle=start_angle,
                               end_angle=start_angle + math.pi))
        segments.append(LineSeg(cap_out, b))
        if i + 1 < len(fingers):
            nxt = fingers[i + 1]
            segments.append(LineSeg(b, nxt.root - nxt.perp * (nxt.width / 2)))
    segments.append(LineSeg(last_b, wrist_top))
    segments.append(LineSeg(wrist_top, wrist_bottom))

    contour = HandContour(segments=tuple(segments))
    polygon = contour.flatten()
    if not contour.is_closed():
        raise DegenerateInput("contour failed to close")
    if g2.signed_area(polygon) <= 0:
        raise DegenerateInput("contour orientation is not counter-clockwise")
    if not g2.polygon_is_simple(polygon):
        raise DegenerateInput("contour self-intersects (fingers crossed?)")
    inside = g2.points_in_polygon(flat.landmarks, polygon)
    margin = g2.points_segments_distance(flat.landmarks,
                                         g2.polygon_segments(polygon)).min(axis=1)
    bad = np.nonzero(~inside | (margin < LANDMARK_MARGIN))[0]
    if bad.size:
        raise DegenerateInput(
            f"landmark {int(bad[0])} not {LANDMARK_MARGIN} cm inside contour")
    return contour


# -- electrodes ---------------------------------------------------------------

def _palm_center(flat: FlatHand) -> np.ndarray:
    idx = [PALM_ROOT] + [finger_root_index(k) for k in range(5)]
    return flat.landmarks[idx].mean(axis=0)


def place_electrodes(flat: FlatHand, contour: HandContour) -> tuple:
    """15 stimulation sites (3 per finger) plus the VGND return electrode.

    Site ids are finger-major: finger k owns ids 3k (fingertip), 3k+1
    (near palm), 3k+2 (finger root); id 15 is the VGND. Diameters shrink
    from 0.6 cm toward the 0.4 cm floor when clearances demand.
    """
    polygon = contour.flatten()
    centers = []
    meta = []
    for k in range(5):
        chain = flat.finger_chain(k)
        for slot, (region, frac) in enumerate(STIM_FRACTIONS):
            centers.append(g2.point_at_fraction(chain, frac))
            meta.append((3 * k + slot, "stimulation", region))
    centers.append(_palm_center(flat) - np.array([VGND_WRIST_OFFSET, 0.0]))
    meta.append((VGND_ID, "vgnd", "palm"))

    n = len(centers)
    diam = np.full(n, ELECTRODE_DIAMETER)
    inside = g2.points_in_polygon(np.array(centers), polygon)
    for i, c in enumerate(centers):
        if not inside[i]:
            raise PlacementInfeasible(f"electrode {meta[i][0]} center outside contour")
        # flattened-arc slack folded into the clearance
        limit = 2 * (g2.point_polygon_boundary_distance(c, polygon)
                     - ELECTRODE_EDGE_CLEARANCE - g2.ARC_FLATTEN_TOL)
        diam[i] = min(diam[i], limit)
    for i in range(n):
        for j in range(i + 1, n):
            limit = float(np.linalg.norm(centers[i] - centers[j])) - ELECTRODE_PAIR_CLEARANCE
            if (diam[i] + diam[j]) / 2 > limit:
                diam[i] = min(diam[i], limit)
                diam[j] = min(diam[j], limit)
    bad = np.nonzero(diam < ELECTRODE_MIN_DIAMETER - 1e-9)[0]
    if bad.size:
        raise PlacementInfeasible(
            f"electrode {meta[int(bad[0])][0]} needs diameter {diam[int(bad[0])]:.2f} cm "
            f"< {ELECTRODE_MIN_DIAMETER} cm floor")

    return tuple(
        ElectrodeSite(id=mid, role=role, region=region,
                      center=np.asarray(c, dtype=float), diameter=float(d))
        for (mid, role, region), c, d in zip(meta, centers, diam)
    )


def build_connector(flat: FlatHand, contour: HandContour, n_pins: int = 16,
                    pitch: float = PIN_PITCH) -> ConnectorSpec:
    """Straight pin row just inside the wrist edge, centered on the palm."""
    polygon = contour.flatten()
    wx = float(polygon[:, 0].min())
    yc = float(_palm_center(flat)[1])
    offsets = (np.arange(n_pins) - (n_pins - 1) / 2) * pitch
    for inset in np.arange(PIN_INSET, 1.41, 0.1):
        pins = np.stack([np.full(n_pins, wx + inset), yc + offsets], axis=-1)
        ok = all(
            g2.point_in_polygon(p, polygon) and
            g2.point_polygon_boundary_distance(p, polygon) >= ROUTE_EDGE_CLEARANCE + TRACE_WIDTH
            for p in pins
        )
        if ok:
            return ConnectorSpec(pins=pins, pitch=pitch)
    raise RoutingInfeasible("connector pins do not fit inside the contour")


# -- routing ------------------------------------------------------------------

def _simplify(points: list) -> np.ndarray:
    pts = [np.asarray(p, dtype=float) for p in points]
    out = [pts[0]]
    for p in pts[1:]:
        if np.linalg.norm(p - out[-1]) > 1e-9:
            out.append(p)
    i = 1
    while i + 1 < len(out):
        a, b, c = out[i - 1], out[i], out[i + 1]
        ab, bc = b - a, c - b
        if abs(float(ab[0] * bc[1] - ab[1] * bc[0])) < 1e-9 and float(ab @ bc) > 0:
            out.pop(i)
        else:
            i += 1
    return np.array(out)


def route_traces(sites: tuple, connector: ConnectorSpec,
                 contour: HandContour) -> tuple:
    """Comb-route every electrode to a distinct connector pin, crossing-free.

    Finger traces run in lanes parallel to the finger axis (fingertip on one
    side, near-palm on the other, finger-root straight down the axis), drop
    through a palm corridor below the VGND disc and fan out to pins in
    left-to-right arrival order. Doglegs steer drops around the VGND disc.
    Raises RoutingInfeasible when the net cannot be realized or validated.
    """
    polygon = contour.flatten()
    stim = sorted((s for s in sites if s.role == "stimulation"), key=lambda s: s.id)
    vgnd = [s for s in sites if s.role == "vgnd"]
    if len(connector.pins) < len(sites):
        raise RoutingInfeasible("fewer connector pins than electrodes")

    by_finger = {}
    for s in stim:
        by_finger.setdefault(s.id // 3, []).append(s)

    # heads: electrode -> (polyline prefix ending at the corridor drop start)
    heads = []
    for finger, group in sorted(by_finger.items()):
        roles = {s.region: s for s in group}
        if len(group) == 1:
            s = group[0]
            heads.append((s, [s.center]))
            continue
        if set(roles) != {"fingertip", "near-palm", "finger-root"}:
            raise RoutingInfeasible(f"finger {finger}: unsupported electrode group")
        root_s, mid_s, tip_s = roles["finger-root"], roles["near-palm"], roles["fingertip"]
        u = tip_s.center - root_s.center
        u = u / np.linalg.norm(u)
        p = g2.rot90(u)
        # The axis runs through the root and tip discs, so only the mid disc
        # can bulge off it; send the fingertip trace down the other side.
        e_mid = float((mid_s.center - root_s.center) @ p)
        sigma = -1.0 if e_mid >= 0 else 1.0
        lane_tip = sigma * max(LANE_OFFSET,
                               sigma * e_mid + mid_s.radius + TRACE_WIDTH / 2 + 0.06)
        lane_mid = -sigma * LANE_OFFSET
        # Palm drops travel toward the wrist, so on a tilted finger they
        # drift toward the sign(u_y) side of the axis. The lane on that side
        # must exit shallowest and the opposite lane deepest, or a drop
        # would sweep across a sibling lane that is still descending.
        s_shallow, s_axis, s_deep = LANE_TAIL_STATIONS
        drift = 1.0 if u[1] >= 0 else -1.0
        s_tip = s_shallow if sigma == drift else s_deep
        s_mid = s_deep if sigma == drift else s_shallow
        plan_geoms = (
            (tip_s, lane_tip, s_tip, sigma * LANE_EXIT_OFFSET),
            (mid_s, lane_mid, s_mid, -sigma * LANE_EXIT_OFFSET),
            (root_s, 0.0, s_axis, 0.0),
        )
        for s, off, tail_station, exit_off in plan_geoms:
            station = float((s.center - root_s.center) @ u)
            entry = root_s.center + off * p + station * u
            tail = root_s.center + off * p - tail_station * u
            exit_pt = root_s.center + exit_off * p - tail_station * u
            heads.append((s, [s.center, entry, tail, exit_pt]))
        # capacity: the outer lane plus clearance must fit the local contour
        for off in (lane_tip, lane_mid):
            probe = root_s.center + off * p
            if g2.point_polygon_boundary_distance(probe, polygon) < \
               TRACE_WIDTH / 2 + ROUTE_EDGE_CLEARANCE - 1e-9:
                raise RoutingInfeasible(
                    f"finger {finger}: lane capacity exceeds local contour width")
    for s in vgnd:
        heads.append((s, [s.center]))

    pins = connector.pins
    x_pin = float(pins[:, 0].max())
    q_xs = [float(path[-1][0]) for _, path in heads]
    band = None
    if vgnd:
        v = vgnd[0]
        delta = v.radius + TRACE_WIDTH / 2 + ROUTE_DISC_CLEARANCE
        band = (float(v.center[0]), float(v.center[1]), delta)
    x_corr = x_pin + 0.3
    if x_corr > min(q_xs) - 0.4:
        raise RoutingInfeasible("palm too short for the corridor fan")

    # Stage A: every drop near the VGND band jogs sideways above the disc
    # onto an exit level outside the band. The capture zone grows with the
    # per-side count until no other drop line lies inside it, so jog sweeps
    # can never cross an uncaptured drop. Within one side the lowest/highest
    # drop exits farthest out and jogs at the largest x: sweeps nest.
    mids = []   # (site, points so far, drop line y below the disc)
    if band is not None:
        x_v, y_v, delta = band
        entries = []
        for s, path in heads:
            q = np.asarray(path[-1], dtype=float)
            entries.append((s, path, q, float(q[1])))
        zone = {1: delta, -1: delta}
        while True:
            captured = {1: [], -1: []}
            for e in entries:
                if e[0].role == "vgnd":
                    continue
                side = 1 if e[3] >= y_v else -1
                if abs(e[3] - y_v) < zone[side]:
                    captured[side].append(e)
            for side in (1, -1):
                captured[side].sort(key=lambda e: e[3])
            grew = False
            for sigma in (1, -1):
                need = delta + 0.08 + 0.10 * max(0, len(captured[sigma]) - 1) + 0.06
                if need > zone[sigma] + 1e-12:
                    zone[sigma] = need
                    grew = True
            if not grew:
                break
        caught_ids = {e[0].id for grp in captured.values() for e in grp}
        for s, path, q, y in entries:
            if s.id not in caught_ids or s.role == "vgnd":
                mids.append((s, list(path), y))
        for sigma in (1, -1):
            group = captured[sigma]
            if sigma > 0:
                group = list(reversed(group))   # farthest-from-center first
            m = len(group)
            for k, (s, path, q, y) in enumerate(group):
                y_a = y_v + sigma * (delta + 0.08 + 0.10 * (m - 1 - k))
                x_hi = x_v + delta + 0.12 + 0.12 * (m - 1 - k)
                if x_hi > float(q[0]) - 0.05:
                    raise RoutingInfeasible("no room to dodge the VGND disc")
                pts = list(path) + [np.array([x_hi, y]), np.array([x_hi, y_a])]
                mids.append((s, pts, y_a))
    else:
        mids = [(s, list(path), float(path[-1][1])) for s, path in heads]

    # Stage B: below the disc, a jog ladder separates corridor arrivals.
    # Drops below the VGND line only ever shift further down, drops above it
    # only up, so no lateral sweeps across the VGND trace; rung x grows with
    # processing order inside each group, which makes the sweeps nest.
    y_split = band[1] if band is not None else None
    below = sorted((t for t in mids if y_split is None or t[2] < y_split),
                   key=lambda t: t[2], reverse=True)
    above = sorted((t for t in mids if y_split is not None and t[2] >= y_split),
                   key=lambda t: t[2])
    if band is not None:
        x_mid_limit = band[0] - band[2] - 0.08
    else:
        x_mid_limit = min(q_xs) - 0.3
    straight = []   # (site, points, arrival y)
    rung = 0
    for group, sign in ((below, -1.0), (above, 1.0)):
        prev = None
        for s, pts, y_in in group:
            if s.role == "vgnd":
                straight.append((s, pts, y_in))
                prev = y_in if prev is None else prev
                continue
            x_mid = x_corr + 0.12 + 0.12 * rung
            rung += 1
            if x_mid > x_mid_limit:
                raise RoutingInfeasible("corridor too narrow for the jog ladder")
            if prev is None:
                y_arr = y_in
            elif sign < 0:
                y_arr = min(y_in, prev - 0.1)
            else:
                y_arr = max(y_in, prev + 0.1)
            prev = y_arr
            pts = pts + [np.array([x_mid, y_in]), np.array([x_mid, y_arr])]
            straight.append((s, pts, y_arr))

    # fan out: arrival order (by y) maps onto pin order (by y)
    straight.sort(key=lambda t: t[2])
    pin_order = np.argsort(pins[:, 1], kind="stable")
    routes = []
    assignment = {}
    for rank, (s, pts, y_arr) in enumerate(straight):
        pin_idx = int(pin_order[rank])
        full = pts + [np.array([x_corr, y_arr]), pins[pin_idx]]
        routes.append(TraceRoute(electrode_id=s.id, points=_simplify(full)))
        assignment[s.id] = pin_idx

    routes = tuple(sorted(routes, key=lambda r: r.electrode_id))
    _check_routes(routes, sites, polygon)
    return routes, assignment


def _check_routes(routes: tuple, sites: tuple, polygon: np.ndarray) -> None:
    boundary = g2.polygon_segments(polygon)
    all_segs = [g2.polyline_segments(r.points) for r in routes]
    for i, r in enumerate(routes):
        segs = all_segs[i]
        if not g2.points_in_polygon(r.points, polygon).all():
            raise RoutingInfeasible(f"route {r.electrode_id} leaves the contour")
        d = g2.segseg_distance_matrix(segs, boundary)
        if float(d.min()) < r.width / 2 + ROUTE_EDGE_CLEARANCE - g2.ARC_FLATTEN_TOL:
            raise RoutingInfeasible(f"route {r.electrode_id} too close to the contour")
        for s in sites:
            if s.id == r.electrode_id:
                continue
            dist = g2.point_polyline_distance(s.center, r.points)
            if dist < s.radius + r.width / 2:
                raise RoutingInfeasible(
                    f"route {r.electrode_id} passes through electrode {s.id}")
    for i in range(len(routes)):
        for j in range(i + 1, len(routes)):
            if bool(g2.segments_intersect_matrix(all_segs[i], all_segs[j]).any()):
                raise RoutingInfeasible(
                    f"routes {routes[i].electrode_id} and {routes[j].electrode_id} cross")


# -- assembled design ---------------------------------------------------------

def synthesize_layout(flat: FlatHand, source_hash: str = "") -> LayoutDesign:
    """Full pipeline: contour, electrodes, connector, routes, validation."""
    contour = generate_contour(flat)
    sites = place_electrodes(flat, contour)
    connector = build_connector(flat, contour, n_pins=len(sites))
    routes, assignment = route_traces(sites, connector, contour)
    design = LayoutDesign(
        contour=contour, sites=sites, routes=routes, connector=connector,
        metadata={
            "source_landmark_sha256": source_hash,
            "units": "cm",
            "pin_assignment": {str(k): v for k, v in sorted(assignment.items())},
        },
    )
    validate_layout(design)
    return design


def validate_layout(design: LayoutDesign) -> None:
    """Assert every joint invariant; raises a typed error on violation."""
    contour = design.contour
    polygon = contour.flatten()
    if not contour.is_closed():
        raise DegenerateInput("contour not closed")
    if g2.signed_area(polygon) <= 0 or not g2.polygon_is_simple(polygon):
        raise DegenerateInput("contour not a simple CCW path")

    sites = design.sites
    stim = [s for s in sites if s.role == "stimulation"]
    vgnd = [s for s in sites if s.role == "vgnd"]
    if len(stim) != N_STIM_CHANNELS or len(vgnd) != 1:
        raise PlacementInfeasible("expected 15 stimulation sites and one VGND")
    for s in sites:
        if s.diameter < ELECTRODE_MIN_DIAMETER - 1e-9:
            raise PlacementInfeasible(f"electrode {s.id} below the diameter floor")
        samples = s.center + s.radius * np.stack(
            [np.cos(np.linspace(0, 2 * math.pi, 16, endpoint=False)),
             np.sin(np.linspace(0, 2 * math.pi, 16, endpoint=False))], axis=-1)
        if not g2.points_in_polygon(samples, polygon).all():
            raise PlacementInfeasible(f"electrode {s.id} disc leaves the contour")
        if g2.point_polygon_boundary_distance(s.center, polygon) < \
           s.radius + ELECTRODE_EDGE_CLEARANCE - g2.ARC_FLATTEN_TOL - 1e-9:
            raise PlacementInfeasible(f"electrode {s.id} clearance to contour")
    for i in range(len(sites)):
        for j in range(i + 1, len(sites)):
            lim = (sites[i].diameter + sites[j].diameter) / 2 + ELECTRODE_PAIR_CLEARANCE
            if float(np.linalg.norm(sites[i].center - sites[j].center)) < lim - 1e-9:
                raise PlacementInfeasible(
                    f"electrodes {sites[i].id} and {sites[j].id} too close")

    pins = design.connector.pins
    if len(pins) < len(design.routes):
        raise RoutingInfeasible("fewer pins than routes")
    d01 = pins[1] - pins[0]
    for a, b in zip(pins, pins[1:]):
        step = b - a
        if abs(float(d01[0] * step[1] - d01[1] * step[0])) > 1e-9:
            raise RoutingInfeasible("connector pins not collinear")
        if float(np.linalg.norm(step)) < 0.1 - 1e-9:
            raise RoutingInfeasible("connector pin pitch below 0.1 cm")
    used_pins = [design.metadata.get("pin_assignment", {}).get(str(r.electrode_id))
                 for r in design.routes]
    if len(set(used_pins)) != len(design.routes) or None in used_pins:
        raise RoutingInfeasible("routes do not map to distinct pins")
    _check_routes(design.routes, design.sites, polygon)
