"""Shared fixtures: bundled fixture loading and a plausible-hand generator."""

from __future__ import annotations

import importlib.resources
import json
import math

import numpy as np
import pytest

from haptiforge.hand_geometry import HandMesh, LandmarkSet


def data_text(name: str) -> str:
    return importlib.resources.files("haptiforge").joinpath("data", name).read_text()


@pytest.fixture(scope="session")
def canonical_landmarks() -> LandmarkSet:
    doc = json.loads(data_text("canonical_landmarks.json"))
    return LandmarkSet(points=np.array(doc["points"], dtype=float))


@pytest.fixture(scope="session")
def canonical_mesh() -> HandMesh:
    doc = json.loads(data_text("canonical_mesh.json"))
    return HandMesh(vertices=np.array(doc["vertices"], dtype=float),
                    faces=np.array(doc["faces"], dtype=int))


def random_hand_landmarks(rng: np.random.Generator) -> LandmarkSet:
    """Plausible flat right hand: spread fingers, 4-9 cm chains, mild curl,
    small out-of-plane noise, random rigid pose."""
    roots = {
        "thumb": (-4.2, 2.6), "forefinger": (-2.1, 6.4), "middle": (0.0, 6.9),
        "ring": (1.9, 6.5), "pinky": (3.5, 5.5),
    }
    fan = {"thumb": 50.0, "forefinger": 12.0, "middle": 0.0,
           "ring": -10.0, "pinky": -20.0}
    scale = {"thumb": 0.78, "forefinger": 0.9, "middle": 1.0,
             "ring": 0.93, "pinky": 0.75}
    total_mid = rng.uniform(5.0, 8.0)
    pts = [(0.0, 0.0)]
    for name in roots:
        r = np.array(roots[name]) * rng.uniform(0.92, 1.08)
        r += rng.uniform(-0.15, 0.15, size=2)
        a = math.radians(fan[name] + rng.uniform(-6.0, 6.0))
        u = np.array([-math.sin(a), math.cos(a)])
        total = float(np.clip(total_mid * scale[name] * rng.uniform(0.92, 1.08),
                              4.0, 9.0))
        segs = np.array([0.48, 0.30, 0.22]) * total
        pts.append(tuple(r))
        p = r.copy()
        for k, seg in enumerate(segs):
            bend = math.radians(rng.uniform(0.0, 3.0) * (k + 1))
            c, s = math.cos(bend), math.sin(bend)
            u = np.array([u[0] * c - u[1] * s, u[0] * s + u[1] * c])
            p = p + u * seg
            pts.append(tuple(p))
    arr = np.array([[x, y, 0.0] for x, y in pts])
    arr[:, 2] += rng.uniform(-0.08, 0.08, size=len(arr))
    # random rigid pose
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0, 2 * math.pi)
    K = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
    arr = arr @ R.T + rng.uniform(-10, 10, size=3)
    return LandmarkSet(points=arr)


@pytest.fixture
def hand_rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
