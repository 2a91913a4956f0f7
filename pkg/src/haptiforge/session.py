"""Psychophysics session runner: randomized frequency x duty trials,
crash-safe rating capture, aggregation, and amplitude calibration.

A session file is JSON lines: a header record followed by one record per
rating, appended and flushed as each rating arrives so a crashed session
resumes at the right trial. The exported CSV matches the perception
module's ratings schema.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BadParameter, BadRating, CalibrationAborted, OutOfOrder
from .perception import (
    IntensitySurface, LEVEL_NAMES, RatingRecord, STUDY_DUTIES,
    STUDY_FREQUENCIES_HZ, fit_surface, records_to_csv,
)
from .stimulator import HARD_AMPLITUDE_CAP_MA

DEFAULT_REPETITIONS = 3
DEFAULT_AMPLITUDE_MA = 1.0
DEFAULT_STIMULUS_S = 1.0    # per-trial stimulus duration (not fixed by the study)
DEFAULT_GAP_S = 2.0         # inter-trial gap

STAIRCASE_START_MA = 0.5
STAIRCASE_STEP_MA = 0.1
STAIRCASE_FLOOR_MA = 0.1
STAIRCASE_REVERSALS = 2

CALIBRATION_RESPONSES = ("comfortable", "too-strong", "imperceptible")


@dataclass(frozen=True)
class SessionConfig:
    participant_id: str = "anonymous"
    frequencies_hz: tuple = STUDY_FREQUENCIES_HZ
    duties: tuple = STUDY_DUTIES
    repetitions: int = DEFAULT_REPETITIONS
    amplitude_ma: float = DEFAULT_AMPLITUDE_MA
    stimulus_s: float = DEFAULT_STIMULUS_S
    gap_s: float = DEFAULT_GAP_S
    seed: int = 0

    def __post_init__(self):
        if self.repetitions < 1:
            raise BadParameter("repetitions must be >= 1")
        if not (0 < self.amplitude_ma <= HARD_AMPLITUDE_CAP_MA):
            raise BadParameter(
                f"amplitude must be in (0, {HARD_AMPLITUDE_CAP_MA}] mA")
        if not self.frequencies_hz or not self.duties:
            raise BadParameter("frequency and duty grids must be non-empty")

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "frequencies_hz": list(self.frequencies_hz),
            "duties": list(self.duties),
            "repetitions": self.repetitions,
            "amplitude_ma": self.amplitude_ma,
            "stimulus_s": self.stimulus_s,
            "gap_s": self.gap_s,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionConfig":
        kwargs = dict(doc)
        for key in ("frequencies_hz", "duties"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class TrialPlan:
    trials: tuple   # of (frequency_hz, duty)

    def __len__(self):
        return len(self.trials)


def generate_trials(config: SessionConfig) -> TrialPlan:
    """Seeded shuffle of the full factorial design times repetitions."""
    combos = [(f, d)
              for f in config.frequencies_hz
              for d in config.duties
              for _ in range(config.repetitions)]
    rng = random.Random(config.seed)
    rng.shuffle(combos)
    return TrialPlan(trials=tuple(combos))


@dataclass
class Session:
    """One participant's run through a TrialPlan, persisted as JSONL."""

    config: SessionConfig
    plan: TrialPlan
    path: Path | None = None
    records: list = field(default_factory=list)

    @property
    def cursor(self) -> int:
        return len(self.records)

    @property
    def done(self) -> bool:
        return self.cursor >= len(self.plan)

    def current_trial(self) -> tuple:
        if self.done:
            raise OutOfOrder("session complete, no current trial")
        return self.plan.trials[self.cursor]

    @classmethod
    def create(cls, config: SessionConfig, path: Path | None = None) -> "Session":
        session = cls(config=config, plan=generate_trials(config), path=path)
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as fh:
                fh.write(json.dumps({"kind": "header", "config": config.to_dict()},
                                    sort_keys=True) + "\n")
                fh.flush()
        return session

    @classmethod
    def load(cls, path) -> "Session":
        path = Path(path)
        lines = [json.loads(line) for line in path.read_text().splitlines() if line]
        if not lines or lines[0].get("kind") != "header":
            raise BadParameter(f"{path}: not a session file")
        config = SessionConfig.from_dict(lines[0]["config"])
        session = cls(config=config, plan=generate_trials(config), path=path)
        for doc in lines[1:]:
            if doc.get("kind") != "rating":
                continue
            session.records.append(RatingRecord(
                participant_id=config.participant_id, trial=doc["trial"],
                frequency_hz=doc["frequency_hz"], duty=doc["duty"],
                rating=doc["rating"], free_grid=True))
        return session

    def record_rating(self, trial_index: int, rating: int) -> RatingRecord:
        """Append the rating for the current trial and advance the cursor."""
        if trial_index != self.cursor:
            raise OutOfOrder(
                f"trial {trial_index} is not the current trial {self.cursor}")
        if self.done:
            raise OutOfOrder("session already complete")
        if not isinstance(rating, int) or rating not in (1, 2, 3, 4, 5):
            raise BadRating(f"rating {rating!r} outside 1..5")
        f, d = self.plan.trials[trial_index]
        record = RatingRecord(participant_id=self.config.participant_id,
                              trial=trial_index, frequency_hz=f, duty=d,
                              rating=rating, free_grid=True)
        self.records.append(record)
        if self.path is not None:
            with open(self.path, "a") as fh:
                fh.write(json.dumps({"kind": "rating", "trial": trial_index,
                                     "frequency_hz": f, "duty": d,
                                     "rating": rating,
                                     "label": LEVEL_NAMES[rating]},
                                    sort_keys=True) + "\n")
                fh.flush()
        return record

    def to_csv(self) -> str:
        return records_to_csv(self.records)

    def fit_surface(self, monotone: bool = False) -> IntensitySurface:
        return fit_surface(self.records, monotone=monotone,
                           frequencies_hz=self.config.frequencies_hz,
                           duties=self.config.duties)


def staircase_state(responses, start_ma: float = STAIRCASE_START_MA,
                    step_ma: float = STAIRCASE_STEP_MA) -> dict:
    """Replay the comfort staircase; the single source of its arithmetic.

    Starts at start_ma; "imperceptible" steps up, "too-strong" steps down,
    "comfortable" terminates at the current level. Without a "comfortable"
    the staircase stops after two direction reversals at the midpoint of the
    two reversal levels. The level is clamped to [0.1, 3.0] mA at every step
    and the result can never exceed 3.0 mA.

    Returns {"level", "reversals", "result"} with result None while the
    staircase is still running.
    """
    level = start_ma
    prev_direction = 0
    reversal_levels = []
    for response in responses:
        if response == "comfortable":
            return {"level": level, "reversals": len(reversal_levels),
                    "result": min(level, HARD_AMPLITUDE_CAP_MA)}
        if response == "imperceptible":
            direction = 1
        elif response == "too-strong":
            direction = -1
        else:
            raise BadParameter(f"unknown staircase response {response!r}")
        if prev_direction != 0 and direction != prev_direction:
            reversal_levels.append(level)
            if len(reversal_levels) == STAIRCASE_REVERSALS:
                mid = (reversal_levels[0] + reversal_levels[1]) / 2
                return {"level": level, "reversals": STAIRCASE_REVERSALS,
                        "result": min(mid, HARD_AMPLITUDE_CAP_MA)}
        prev_direction = direction
        level = min(HARD_AMPLITUDE_CAP_MA,
                    max(STAIRCASE_FLOOR_MA, level + direction * step_ma))
    return {"level": level, "reversals": len(reversal_levels), "result": None}


def calibrate_amplitude(responses, start_ma: float = STAIRCASE_START_MA,
                        step_ma: float = STAIRCASE_STEP_MA) -> float:
    """Run the comfort staircase to completion over the given responses.

    Raises CalibrationAborted when the responses run out before the
    staircase converges.
    """
    state = staircase_state(responses, start_ma=start_ma, step_ma=step_ma)
    if state["result"] is None:
        raise CalibrationAborted("responses ended before the staircase converged")
    return state["result"]
