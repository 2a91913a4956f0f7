"""Perceived-intensity surface over the frequency x duty-cycle grid.

Ratings use the five-level categorical scale (1 = no feeling .. 5 = pain).
Cell values are plain means of the ratings in that cell; the optional
monotone projection enforces the empirical ordering (lower frequency and
larger duty feel stronger) via alternating isotonic regression. Queries
interpolate bilinearly in (log10 frequency, duty) space because the study
frequencies are log-spaced.

Surfaces are immutable after fitting; all queries are pure.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadRating, MissingCell, OutOfDomain, TargetUnreachable

STUDY_FREQUENCIES_HZ = (10.0, 25.0, 50.0, 100.0, 500.0)
STUDY_DUTIES = (0.02, 0.05, 0.10, 0.25, 0.50)
RATING_LEVELS = (1, 2, 3, 4, 5)
LEVEL_NAMES = {1: "No feeling", 2: "Faint feeling", 3: "Moderate feeling",
               4: "Slight discomfort", 5: "Pain"}

INVERT_TOLERANCE = 0.25   # quarter of one categorical step
REFINEMENT = 50

CSV_HEADER = ["participant_id", "trial", "frequency_hz", "duty_pct", "rating"]


@dataclass(frozen=True)
class RatingRecord:
    participant_id: str
    trial: int
    frequency_hz: float
    duty: float
    rating: int
    free_grid: bool = False

    def __post_init__(self):
        if self.rating not in RATING_LEVELS:
            raise BadRating(f"rating {self.rating} outside 1..5")
        if not self.free_grid:
            if not any(math.isclose(self.frequency_hz, f) for f in STUDY_FREQUENCIES_HZ):
                raise BadRating(f"frequency {self.frequency_hz} not on the study grid")
            if not any(math.isclose(self.duty, d) for d in STUDY_DUTIES):
                raise BadRating(f"duty {self.duty} not on the study grid")


@dataclass(frozen=True)
class IntensitySurface:
    """Mean rating per (frequency, duty) cell with interpolation support."""

    frequencies_hz: tuple
    duties: tuple
    grid: np.ndarray          # shape (len(frequencies), len(duties))
    monotone: bool = False

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.shape != (len(self.frequencies_hz), len(self.duties)):
            raise BadRating("grid shape does not match axes")
        if grid.min() < 1.0 - 1e-9 or grid.max() > 5.0 + 1e-9:
            raise BadRating("cell values must lie in [1, 5]")
        object.__setattr__(self, "grid", grid)
        grid.setflags(write=False)

    def to_dict(self) -> dict:
        return {
            "frequencies_hz": list(self.frequencies_hz),
            "duties": list(self.duties),
            "grid": [[float(v) for v in row] for row in self.grid],
            "monotone": self.monotone,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "IntensitySurface":
        return cls(frequencies_hz=tuple(doc["frequencies_hz"]),
                   duties=tuple(doc["duties"]),
                   grid=np.array(doc["grid"], dtype=float),
                   monotone=bool(doc.get("monotone", False)))


def _pava_increasing(y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators fit, non-decreasing, equal weights."""
    vals: list = []
    counts: list = []
    for v in y:
        vals.append(float(v))
        counts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1] + 0.0:
            total = counts[-2] + counts[-1]
            merged = (vals[-2] * counts[-2] + vals[-1] * counts[-1]) / total
            vals[-2:] = [merged]
            counts[-2:] = [total]
    out = np.empty(len(y))
    k = 0
    for v, c in zip(vals, counts):
        out[k:k + c] = v
        k += c
    return out


def _project_monotone(grid: np.ndarray, tol: float = 1e-9,
                      max_sweeps: int = 1000) -> np.ndarray:
    """Alternate row/column isotonic sweeps until the update is below tol.

    Rows (fixed frequency) become non-decreasing in duty; columns (fixed
    duty) become non-increasing in frequency.
    """
    out = grid.astype(float).copy()
    for _ in range(max_sweeps):
        before = out.copy()
        for i in range(out.shape[0]):
            out[i, :] = _pava_increasing(out[i, :])
        for j in range(out.shape[1]):
            out[:, j] = _pava_increasing(out[::-1, j])[::-1]
        if float(np.abs(out - before).max()) < tol:
            break
    return out


def fit_surface(records: list, monotone: bool = False,
                frequencies_hz: tuple = STUDY_FREQUENCIES_HZ,
                duties: tuple = STUDY_DUTIES) -> IntensitySurface:
    """Cell means of the rating records; optionally project onto the
    monotone cone. Every cell needs at least one record."""
    freqs = tuple(sorted(frequencies_hz))
    duts = tuple(sorted(duties))
    sums = np.zeros((len(freqs), len(duts)))
    counts = np.zeros_like(sums)
    for r in records:
        fi = next((k for k, f in enumerate(freqs)
                   if math.isclose(r.frequency_hz, f)), None)
        dj = next((k for k, d in enumerate(duts) if math.isclose(r.duty, d)), None)
        if fi is None or dj is None:
            raise MissingCell(
                f"record at ({r.frequency_hz} Hz, duty {r.duty}) is off the grid")
        sums[fi, dj] += r.rating
        counts[fi, dj] += 1
    if (counts == 0).any():
        fi, dj = map(int, np.argwhere(counts == 0)[0])
        raise MissingCell(f"no ratings for ({freqs[fi]:g} Hz, duty {duts[dj]:g})")
    grid = sums / counts
    if monotone:
        grid = _project_monotone(grid)
    return IntensitySurface(frequencies_hz=freqs, duties=duts, grid=grid,
                            monotone=monotone)


def predict(surface: IntensitySurface, frequency_hz: float, duty: float) -> float:
    """Bilinear interpolation in (log10 frequency, duty) space."""
    freqs = surface.frequencies_hz
    duts = surface.duties
    if not (freqs[0] - 1e-12 <= frequency_hz <= freqs[-1] + 1e-12):
        raise OutOfDomain(f"frequency {frequency_hz} Hz outside "
                          f"[{freqs[0]:g}, {freqs[-1]:g}]")
    if not (duts[0] - 1e-12 <= duty <= duts[-1] + 1e-12):
        raise OutOfDomain(f"duty {duty} outside [{duts[0]:g}, {duts[-1]:g}]")
    lx = math.log10(min(max(frequency_hz, freqs[0]), freqs[-1]))
    logf = [math.log10(f) for f in freqs]
    i = min(max(np.searchsorted(logf, lx, side="right") - 1, 0), len(freqs) - 2)
    j = min(max(np.searchsorted(duts, min(max(duty, duts[0]), duts[-1]),
                                side="right") - 1, 0), len(duts) - 2)
    tx = (lx - logf[i]) / (logf[i + 1] - logf[i])
    ty = (min(max(duty, duts[0]), duts[-1]) - duts[j]) / (duts[j + 1] - duts[j])
    g = surface.grid
    return float(
        g[i, j] * (1 - tx) * (1 - ty) + g[i + 1, j] * tx * (1 - ty)
        + g[i, j + 1] * (1 - tx) * ty + g[i + 1, j + 1] * tx * ty
    )


def invert(surface: IntensitySurface, target: float,
           preference: tuple = ("lowest-charge",)) -> tuple:
    """Stimulus parameters whose predicted level is within 0.25 of target.

    Scans a REFINEMENT x REFINEMENT grid over the surface domain. Preference
    ("lowest-charge",) minimizes charge per period at 1 mA (duty/frequency);
    ("nearest-to", f0, d0) minimizes distance in normalized (log f, duty)
    space. Raises TargetUnreachable when the target is outside the surface
    range or no refined point is close enough.
    """
    g = surface.grid
    if not (g.min() - 1e-9 <= target <= g.max() + 1e-9):
        raise TargetUnreachable(
            f"target {target} outside surface range [{g.min():g}, {g.max():g}]")
    freqs = np.logspace(math.log10(surface.frequencies_hz[0]),
                        math.log10(surface.frequencies_hz[-1]), REFINEMENT)
    duts = np.linspace(surface.duties[0], surface.duties[-1], REFINEMENT)
    log_span = math.log10(surface.frequencies_hz[-1] / surface.frequencies_hz[0])
    dut_span = surface.duties[-1] - surface.duties[0]

    best = None
    best_cost = math.inf
    for f in freqs:
        for d in duts:
            level = predict(surface, float(f), float(d))
            if abs(level - target) > INVERT_TOLERANCE:
                continue
            if preference[0] == "lowest-charge":
                cost = d / f
            elif preference[0] == "nearest-to":
                f0, d0 = preference[1], preference[2]
                cost = (math.log10(f / f0) / log_span) ** 2 \
                    + ((d - d0) / dut_span) ** 2
            else:
                raise TargetUnreachable(f"unknown preference {preference[0]!r}")
            if cost < best_cost - 1e-15:
                best_cost = cost
                best = (float(f), float(d))
    if best is None:
        raise TargetUnreachable(f"no parameters reach level {target} within "
                                f"{INVERT_TOLERANCE}")
    return best


def synthetic_default_surface() -> IntensitySurface:
    """Synthetic stand-in surface (not measured data).

    Follows the observed qualitative ordering: strongest at low frequency
    and high duty, weakest at high frequency and low duty.
    """
    freqs = STUDY_FREQUENCIES_HZ
    duts = STUDY_DUTIES
    grid = np.empty((5, 5))
    for i, f in enumerate(freqs):
        for j, d in enumerate(duts):
            fn = (math.log10(f) - 1.0) / (math.log10(500.0) - 1.0)
            dn = (d - duts[0]) / (duts[-1] - duts[0])
            grid[i, j] = 1.0 + 4.0 * (0.55 * dn + 0.45 * (1.0 - fn))
    return IntensitySurface(frequencies_hz=freqs, duties=duts, grid=grid,
                            monotone=True)


def records_to_csv(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.participant_id, r.trial, f"{r.frequency_hz:g}",
                    f"{r.duty * 100:g}", r.rating])
    return buf.getvalue()


def records_from_csv(text: str, free_grid: bool = False) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise BadRating(f"ratings CSV must start with {','.join(CSV_HEADER)}")
    records = []
    for k, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise BadRating(f"line {k}: expected {len(CSV_HEADER)} columns")
        try:
            records.append(RatingRecord(
                participant_id=row[0], trial=int(row[1]),
                frequency_hz=float(row[2]), duty=float(row[3]) / 100.0,
                rating=int(row[4]), free_grid=free_grid))
        except ValueError as exc:
            raise BadRating(f"line {k}: {exc}") from exc
    return records
