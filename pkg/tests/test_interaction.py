"""Contact-event mapping onto stimulus plans."""

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from haptiforge.errors import BadParameter, Unschedulable
from haptiforge.interaction import ContactEvent, StimulusPlan, apply_event
from haptiforge.perception import predict, synthetic_default_surface
from haptiforge.stimulator import SafetyLimits, build_schedule

SURFACE = synthetic_default_surface()
LIMITS = SafetyLimits()


def ev(electrode=3, level=3.0, kind="begin", t=0.0, hint=None):
    return ContactEvent(electrode=electrode, level=level, kind=kind,
                        timestamp_ms=t, frequency_hint_hz=hint)


class TestApplyEvent:
    def test_begin_then_end_leaves_empty_plan(self):
        plan = apply_event(StimulusPlan(), ev(kind="begin"), SURFACE, 1.0)
        assert plan.channels() == [3]
        plan = apply_event(plan, ev(kind="end"), SURFACE, 1.0)
        assert plan.channels() == []

    def test_begin_hits_requested_level(self):
        plan = apply_event(StimulusPlan(), ev(level=3.0), SURFACE, 1.0)
        p = plan.patterns[3]
        assert abs(predict(SURFACE, p.frequency_hz, p.duty) - 3.0) <= 0.25
        assert p.amplitude_ma == 1.0

    def test_matches_exhaustive_inversion_oracle(self):
        plan = apply_event(StimulusPlan(), ev(level=3.0, hint=50.0), SURFACE, 1.0)
        p = plan.patterns[3]
        # brute-force the same 50x50 refinement with the nearest-to cost
        import math
        freqs = np.logspace(1, math.log10(500.0), 50)
        duts = np.linspace(0.02, 0.50, 50)
        best = None
        for f in freqs:
            for d in duts:
                if abs(predict(SURFACE, float(f), float(d)) - 3.0) > 0.25:
                    continue
                cost = (math.log10(f / 50.0) / math.log10(50.0)) ** 2 + \
                    ((d - 0.10) / 0.48) ** 2
                if best is None or cost < best[0] - 1e-15:
                    best = (cost, float(f), float(d))
        assert p.frequency_hz == pytest.approx(best[1])
        assert p.duty == pytest.approx(best[2])

    def test_six_finger_grasp_schedulable(self):
        plan = StimulusPlan()
        for channel in (0, 3, 6, 9, 12, 14):
            plan = apply_event(plan, ev(electrode=channel, level=2.0),
                               SURFACE, 1.0)
        assert len(plan.channels()) == 6
        events = build_schedule(plan.active_patterns(), LIMITS)
        assert events

    def test_update_replaces_pattern(self):
        plan = apply_event(StimulusPlan(), ev(level=2.0), SURFACE, 1.0)
        before = plan.patterns[3]
        plan = apply_event(plan, ev(level=4.0, kind="update"), SURFACE, 1.0)
        after = plan.patterns[3]
        assert predict(SURFACE, after.frequency_hz, after.duty) > \
            predict(SURFACE, before.frequency_hz, before.duty)

    def test_end_idempotent(self):
        plan = apply_event(StimulusPlan(), ev(), SURFACE, 1.0)
        once = apply_event(plan, ev(kind="end"), SURFACE, 1.0)
        twice = apply_event(once, ev(kind="end"), SURFACE, 1.0)
        assert once.patterns == twice.patterns
        assert once.revision == twice.revision

    def test_order_independence_disjoint_channels(self):
        a = apply_event(StimulusPlan(), ev(electrode=2, level=2.0), SURFACE, 1.0)
        a = apply_event(a, ev(electrode=5, level=3.0), SURFACE, 1.0)
        b = apply_event(StimulusPlan(), ev(electrode=5, level=3.0), SURFACE, 1.0)
        b = apply_event(b, ev(electrode=2, level=2.0), SURFACE, 1.0)
        assert a.patterns == b.patterns

    def test_unschedulable_leaves_plan_unchanged(self):
        plan = StimulusPlan()
        applied = []
        # max-duty contacts until the frame overflows
        with pytest.raises(Unschedulable):
            for channel in range(15):
                plan = apply_event(plan, ev(electrode=channel, level=5.0),
                                   SURFACE, 1.0)
                applied.append(channel)
        assert plan.channels() == applied  # failed event did not mutate

    def test_revision_increments(self):
        plan = StimulusPlan()
        p1 = apply_event(plan, ev(), SURFACE, 1.0)
        p2 = apply_event(p1, ev(kind="update", level=4.0), SURFACE, 1.0)
        assert (plan.revision, p1.revision, p2.revision) == (0, 1, 2)

    def test_event_validation(self):
        with pytest.raises(BadParameter):
            ContactEvent(electrode=15, level=3, kind="begin", timestamp_ms=0)
        with pytest.raises(BadParameter):
            ContactEvent(electrode=0, level=0.5, kind="begin", timestamp_ms=0)
        with pytest.raises(BadParameter):
            ContactEvent(electrode=0, level=3, kind="poke", timestamp_ms=0)

    def test_contact_schema_parsing(self):
        event = ContactEvent.from_dict({
            "schema": "contact/1", "electrode": 4, "level": 2.5,
            "kind": "begin", "timestamp_ms": 12.5, "frequency_hint_hz": 100.0,
        })
        assert event.electrode == 4
        assert event.frequency_hint_hz == 100.0
        with pytest.raises(BadParameter):
            ContactEvent.from_dict({"schema": "contact/2", "electrode": 0,
                                    "level": 3, "kind": "begin"})


@given(channels=st.lists(st.integers(0, 14), min_size=1, max_size=6,
                         unique=True),
       levels=st.lists(st.floats(1.0, 3.0), min_size=6, max_size=6))
@settings(max_examples=30, deadline=None)
def test_plans_always_valid_or_rejected(channels, levels):
    plan = StimulusPlan()
    for channel, level in zip(channels, levels):
        try:
            plan = apply_event(plan, ev(electrode=channel, level=level),
                               SURFACE, 1.0)
        except Unschedulable:
            continue
        build_schedule(plan.active_patterns(), LIMITS)  # must stay schedulable
