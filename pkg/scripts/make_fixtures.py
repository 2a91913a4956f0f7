#!/usr/bin/env python3
"""Regenerate the bundled canonical fixtures.

Writes src/haptiforge/data/canonical_landmarks.json (a flat right hand,
fingers spread, tiny z noise) and canonical_mesh.json (778 vertices / 1538
faces). The mesh is a Delaunay triangulation of a 16-vertex convex boundary
plus 762 strictly-interior points: Euler's relation then forces exactly
2*778 - 2 - 16 = 1538 triangles. Deterministic: seeds are scanned in order
and the first valid triangulation wins.
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "haptiforge" / "data"

# finger: (root xy, direction angle from +y in degrees, segment lengths cm)
HAND = {
    "thumb": ((-4.2, 2.6), 50.0, (2.0, 1.6, 1.4)),
    "forefinger": ((-2.1, 6.4), 12.0, (2.6, 1.6, 1.2)),
    "middle": ((0.0, 6.9), 0.0, (2.9, 1.8, 1.3)),
    "ring": ((1.9, 6.5), -10.0, (2.7, 1.7, 1.2)),
    "pinky": ((3.5, 5.5), -20.0, (2.1, 1.4, 1.0)),
}


def make_landmarks(seed: int = 7) -> list:
    rng = np.random.default_rng(seed)
    pts = [(0.0, 0.0, 0.0)]  # palm root
    for root, angle_deg, segments in HAND.values():
        a = math.radians(angle_deg)
        u = np.array([-math.sin(a), math.cos(a)])
        p = np.array(root, dtype=float)
        pts.append((p[0], p[1], 0.0))
        for k, seg in enumerate(segments):
            bend = math.radians(2.0 * (k + 1))  # slight cumulative curl
            c, s = math.cos(bend), math.sin(bend)
            u = np.array([u[0] * c - u[1] * s, u[0] * s + u[1] * c])
            p = p + u * seg
            pts.append((float(p[0]), float(p[1]), 0.0))
    out = [(x, y, z + float(rng.uniform(-0.05, 0.05))) for x, y, z in pts]
    return [[round(v, 4) for v in p] for p in out]


def make_mesh(n_vertices: int = 778, n_boundary: int = 16) -> dict:
    center = np.array([0.0, 4.5])
    radii = np.array([5.5, 8.0])
    angles = 2 * math.pi * np.arange(n_boundary) / n_boundary
    boundary = center + radii * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    n_interior = n_vertices - n_boundary
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        pts = []
        while len(pts) < n_interior:
            q = rng.uniform(-1, 1, size=2)
            if q @ q <= 1.0:
                pts.append(center + 0.93 * radii * q)
        xy = np.vstack([boundary, np.array(pts)])
        tri = Delaunay(xy)
        if len(tri.simplices) == 2 * n_vertices - 2 - n_boundary and \
           len(tri.convex_hull) == n_boundary:
            z = rng.uniform(-0.05, 0.05, size=n_vertices)
            vertices = np.column_stack([xy, z])
            return {
                "vertices": [[round(float(v), 4) for v in row] for row in vertices],
                "faces": [[int(i) for i in f] for f in tri.simplices],
            }
    raise RuntimeError("no seed produced the exact face count")


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    landmarks = {"units": "cm", "points": make_landmarks()}
    (DATA_DIR / "canonical_landmarks.json").write_text(
        json.dumps(landmarks, indent=1) + "\n")
    mesh = make_mesh()
    (DATA_DIR / "canonical_mesh.json").write_text(json.dumps(mesh) + "\n")
    print(f"wrote fixtures to {DATA_DIR} "
          f"({len(mesh['vertices'])} vertices, {len(mesh['faces'])} faces)")


if __name__ == "__main__":
    main()
