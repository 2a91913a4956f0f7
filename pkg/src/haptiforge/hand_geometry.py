"""Palm-plane fitting and 2D flattening of hand landmark and mesh data.

All coordinates are centimeters. Landmark files follow the 21-point
convention: index 0 is the palm root, then four landmarks per finger
(thumb, forefinger, middle, ring, pinky), ordered base to tip. See
docs/protocol.md for the file formats.

All operations here are pure functions over immutable arrays; they are safe
to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, NonFinite

N_LANDMARKS = 21
MESH_VERTEX_COUNT = 778
MESH_FACE_COUNT = 1538

PALM_ROOT = 0
FINGERS = ("thumb", "forefinger", "middle", "ring", "pinky")
SEGMENTS = ("metacarpal", "proximal", "intermediate", "distal")

# Relative eigenvalue gap below which the plane normal is ambiguous.
EIGEN_TIE_REL = 1e-9


def finger_landmark_indices(finger: int) -> tuple[int, int, int, int]:
    """Landmark indices (base knuckle, two mid joints, tip) for finger 0..4."""
    base = 1 + 4 * finger
    return (base, base + 1, base + 2, base + 3)


def finger_root_index(finger: int) -> int:
    return 1 + 4 * finger


def _as_finite_array(points, shape, what: str) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.shape != shape:
        raise DegenerateInput(f"{what}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{what}: contains NaN or infinite coordinates")
    return arr


@dataclass(frozen=True)
class LandmarkSet:
    """21 hand-joint positions (cm): palm root then 4 per finger, base to tip."""

    points: np.ndarray

    def __post_init__(self):
        arr = _as_finite_array(self.points, (N_LANDMARKS, 3), "landmarks")
        diff = arr[:, None, :] - arr[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= 0.0:
            i, j = np.unravel_index(int(dist.argmin()), dist.shape)
            raise DegenerateInput(f"landmarks {i} and {j} are coincident")
        object.__setattr__(self, "points", arr)
        self.points.setflags(write=False)


@dataclass(frozen=True)
class HandMesh:
    """Triangle mesh of the hand surface: 778 vertices, 1538 faces."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        verts = _as_finite_array(self.vertices, (MESH_VERTEX_COUNT, 3), "mesh vertices")
        faces = np.asarray(self.faces, dtype=int)
        if faces.shape != (MESH_FACE_COUNT, 3):
            raise DegenerateInput(
                f"mesh faces: expected shape ({MESH_FACE_COUNT}, 3), got {faces.shape}"
            )
        if faces.min() < 0 or faces.max() >= MESH_VERTEX_COUNT:
            raise DegenerateInput("mesh face index out of range")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "faces", faces)
        self.vertices.setflags(write=False)
        self.faces.setflags(write=False)


@dataclass(frozen=True)
class Plane:
    """Plane n.x + d = 0 with unit normal and the fit centroid on the plane."""

    normal: np.ndarray
    centroid: np.ndarray
    d: float

    def __post_init__(self):
        n = _as_finite_array(self.normal, (3,), "plane normal")
        c = _as_finite_array(self.centroid, (3,), "plane centroid")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise DegenerateInput("plane normal is not unit length")
        if abs(float(n @ c) + self.d) > 1e-9:
            raise DegenerateInput("plane offset inconsistent with centroid")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "centroid", c)
        n.setflags(write=False)
        c.setflags(write=False)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.normal + self.d


@dataclass(frozen=True)
class FlatHand:
    """2D images (cm) of mesh vertices and landmarks in the in-plane frame.

    Frame: origin at the plane centroid, x axis along the palm-root to
    middle-finger-root direction projected into the plane, y = n cross x.
    The map is an isometry of the plane, so in-plane distances survive.
    """

    vertices: np.ndarray   # (V, 2), may be empty when no mesh was supplied
    landmarks: np.ndarray  # (21, 2)

    def finger_chain(self, finger: int) -> np.ndarray:
        """2D polyline (4 points) from base knuckle to tip for finger 0..4."""
        idx = list(finger_landmark_indices(finger))
        return self.landmarks[idx]

    def mirrored(self) -> "FlatHand":
        """Mirror about the 2D y axis (left-hand handling; unvalidated)."""
        flip = np.array([-1.0, 1.0])
        return FlatHand(self.vertices * flip, self.landmarks * flip)


@dataclass(frozen=True)
class FingerMetrics:
    """Per-finger anatomical segment lengths (cm), keyed finger -> segment."""

    lengths: dict

    def total(self, finger: str) -> float:
        return float(sum(self.lengths[finger].values()))

    def to_dict(self) -> dict:
        out = {}
        for finger in FINGERS:
            out[finger] = {seg: self.lengths[finger][seg] for seg in SEGMENTS}
            out[finger]["total"] = self.total(finger)
        return out


def fit_plane(landmarks: LandmarkSet) -> Plane:
    """Fit the palm reference plane to the 21 joint coordinates.

    Total-least-squares fit: the normal is the eigenvector of the 3x3
    scatter matrix of centered points with the smallest eigenvalue, which
    minimizes the sum of squared orthogonal distances. Sign convention:
    the normal's largest-magnitude component is positive.

    Raises DegenerateInput when the two smallest eigenvalues are within
    1e-9 relative (collinear or near-collinear points): the normal would
    not be unique.
    """
    pts = landmarks.points
    c = pts.mean(axis=0)
    centered = pts - c
    cov = centered.T @ centered
    evals, evecs = np.linalg.eigh(cov)  # ascending eigenvalues
    if evals[2] <= 0.0:
        raise DegenerateInput("all landmarks coincident")
    if (evals[1] - evals[0]) / evals[2] < EIGEN_TIE_REL:
        raise DegenerateInput("plane normal ambiguous: smallest eigenvalues tie")
    n = evecs[:, 0]
    k = int(np.argmax(np.abs(n)))
    if n[k] < 0:
        n = -n
    n = n / np.linalg.norm(n)
    return Plane(normal=n, centroid=c, d=float(-(n @ c)))


def project_vertices(mesh: HandMesh, plane: Plane) -> HandMesh:
    """Orthogonally project every mesh vertex onto the plane.

    v' = v - (n . (v - c)) n. Faces are unchanged. Idempotent.
    """
    n = plane.normal
    offsets = (mesh.vertices - plane.centroid) @ n
    projected = mesh.vertices - offsets[:, None] * n
    return HandMesh(vertices=projected, faces=mesh.faces)


def project_points(points: np.ndarray, plane: Plane) -> np.ndarray:
    pts = _as_finite_array(points, np.asarray(points).shape, "points")
    offsets = (pts - plane.centroid) @ plane.normal
    return pts - offsets[:, None] * plane.normal


def flatten_to_2d(projected: HandMesh | None, plane: Plane,
                  landmarks: LandmarkSet) -> FlatHand:
    """Express projected vertices and landmark images in in-plane 2D
    coordinates (an isometry, so pairwise in-plane distances are kept).

    Landmarks are projected into the plane first; their 2D images are the
    in-plane components. The x axis runs from the palm root image toward
    the middle-finger root image.
    """
    lm3 = project_points(landmarks.points, plane)
    axis = lm3[finger_root_index(2)] - lm3[PALM_ROOT]
    norm = np.linalg.norm(axis)
    if norm < 1e-9:
        raise DegenerateInput("palm root and middle-finger root project to one point")
    x_axis = axis / norm
    y_axis = np.cross(plane.normal, x_axis)

    def to_2d(pts3: np.ndarray) -> np.ndarray:
        rel = pts3 - plane.centroid
        return np.stack([rel @ x_axis, rel @ y_axis], axis=-1)

    if projected is None:
        verts2 = np.zeros((0, 2))
    else:
        resid = np.abs(plane.signed_distance(projected.vertices))
        if resid.max() > 1e-6:
            raise DegenerateInput(
                f"mesh vertices are not on the plane (max residual {resid.max():.2e} cm)"
            )
        verts2 = to_2d(projected.vertices)
    return FlatHand(vertices=verts2, landmarks=to_2d(lm3))


def compute_finger_metrics(landmarks: LandmarkSet) -> FingerMetrics:
    """Segment lengths along each finger's 4-point chain from the palm root.

    root->knuckle = metacarpal, then proximal, intermediate, distal.
    """
    pts = landmarks.points
    lengths = {}
    for f, name in enumerate(FINGERS):
        chain = [PALM_ROOT, *finger_landmark_indices(f)]
        segs = {}
        for s, seg in enumerate(SEGMENTS):
            segs[seg] = float(np.linalg.norm(pts[chain[s + 1]] - pts[chain[s]]))
        lengths[name] = segs
    return FingerMetrics(lengths=lengths)
