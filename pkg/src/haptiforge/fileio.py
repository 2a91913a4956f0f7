"""Input file parsing: landmark JSON, mesh JSON or Wavefront-style text."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import DegenerateInput
from .hand_geometry import HandMesh, LandmarkSet, N_LANDMARKS


def load_landmarks(path) -> LandmarkSet:
    """JSON document {"units": "cm", "points": [[x, y, z] x 21]}."""
    doc = json.loads(Path(path).read_text())
    if doc.get("units") != "cm":
        raise DegenerateInput(f"{path}: landmark units must be \"cm\"")
    points = doc.get("points")
    if not isinstance(points, list) or len(points) != N_LANDMARKS:
        n = len(points) if isinstance(points, list) else "no"
        raise DegenerateInput(
            f"{path}: exactly {N_LANDMARKS} points required, got {n}")
    return LandmarkSet(points=np.array(points, dtype=float))


def landmark_hash(landmarks: LandmarkSet) -> str:
    canonical = json.dumps(landmarks.points.tolist(), separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _load_obj_mesh(text: str) -> HandMesh:
    vertices = []
    faces = []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            vertices.append([float(v) for v in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(tok.split("/")[0]) - 1 for tok in parts[1:4]]
            faces.append(idx)
    return HandMesh(vertices=np.array(vertices, dtype=float),
                    faces=np.array(faces, dtype=int))


def load_mesh(path) -> HandMesh:
    """Mesh JSON {"vertices": ..., "faces": ...} or OBJ-style v/f lines."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        return HandMesh(vertices=np.array(doc["vertices"], dtype=float),
                        faces=np.array(doc["faces"], dtype=int))
    return _load_obj_mesh(text)
