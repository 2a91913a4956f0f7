"""Intensity surface fitting, interpolation and inversion.

The monotone-fit oracle enumerates every monotone 3x3 matrix over a
discretized level set (branch and bound); the bilinear oracle is a from-
scratch re-implementation evaluated per cell.
"""

import math

import numpy as np
import pytest

from haptiforge.errors import BadRating, MissingCell, OutOfDomain, TargetUnreachable
from haptiforge.perception import (
    IntensitySurface, RatingRecord, STUDY_DUTIES, STUDY_FREQUENCIES_HZ,
    fit_surface, invert, predict, records_from_csv, records_to_csv,
    synthetic_default_surface,
)


def make_records(fn, reps=1, participant="p0"):
    records = []
    trial = 0
    for f in STUDY_FREQUENCIES_HZ:
        for d in STUDY_DUTIES:
            for _ in range(reps):
                records.append(RatingRecord(
                    participant_id=participant, trial=trial, frequency_hz=f,
                    duty=d, rating=int(fn(f, d))))
                trial += 1
    return records


def monotone_level(f, d):
    """Known monotone function following the observed ordering, integer 1..5."""
    fn = (math.log10(f) - 1.0) / (math.log10(500.0) - 1.0)
    dn = (d - 0.02) / 0.48
    return 1 + round(4 * (0.5 * dn + 0.5 * (1.0 - fn)))


def oracle_bilinear(surface, f, d):
    """Independent bilinear interpolation in (log10 f, duty)."""
    logf = [math.log10(v) for v in surface.frequencies_hz]
    lx = math.log10(f)
    i = 0
    while i < len(logf) - 2 and lx > logf[i + 1]:
        i += 1
    j = 0
    duts = surface.duties
    while j < len(duts) - 2 and d > duts[j + 1]:
        j += 1
    tx = (lx - logf[i]) / (logf[i + 1] - logf[i])
    ty = (d - duts[j]) / (duts[j + 1] - duts[j])
    g = surface.grid
    top = g[i, j] + (g[i + 1, j] - g[i, j]) * tx
    bot = g[i, j + 1] + (g[i + 1, j + 1] - g[i, j + 1]) * tx
    return top + (bot - top) * ty


def oracle_monotone_best_sse(data, n_levels):
    levels = [float(v) for v in np.linspace(data.min(), data.max(), n_levels)]
    best = [math.inf]
    X = np.zeros((3, 3))
    vals = data.tolist()

    def rec(pos, acc):
        if acc >= best[0]:
            return
        if pos == 9:
            best[0] = acc
            return
        i, j = divmod(pos, 3)
        for v in levels:
            if i > 0 and v > X[i - 1, j] + 1e-12:
                continue
            if j > 0 and v < X[i, j - 1] - 1e-12:
                continue
            X[i, j] = v
            rec(pos + 1, acc + (v - vals[i][j]) ** 2)

    rec(0, 0.0)
    return best[0]


class TestFitSurface:
    def test_constant_ratings(self):
        surface = fit_surface(make_records(lambda f, d: 3))
        assert np.all(surface.grid == 3.0)

    def test_zero_noise_monotone_function_reproduced(self):
        surface = fit_surface(make_records(monotone_level), monotone=True)
        for i, f in enumerate(STUDY_FREQUENCIES_HZ):
            for j, d in enumerate(STUDY_DUTIES):
                assert surface.grid[i, j] == pytest.approx(monotone_level(f, d))

    def test_cell_means_exact(self):
        records = make_records(lambda f, d: 2) + make_records(lambda f, d: 4)
        surface = fit_surface(records)
        assert np.all(surface.grid == 3.0)

    def test_missing_cell_named(self):
        records = [r for r in make_records(lambda f, d: 3)
                   if not (r.frequency_hz == 25.0 and r.duty == 0.10)]
        with pytest.raises(MissingCell, match="25"):
            fit_surface(records)

    def test_monotone_constraints_cell_by_cell(self):
        rng = np.random.default_rng(9)
        records = make_records(
            lambda f, d: int(np.clip(monotone_level(f, d) + rng.integers(-1, 2),
                                     1, 5)), reps=3)
        surface = fit_surface(records, monotone=True)
        g = surface.grid
        assert np.all(g[:-1, :] >= g[1:, :] - 1e-9)   # freq up -> weaker
        assert np.all(g[:, :-1] <= g[:, 1:] + 1e-9)   # duty up -> stronger

    def test_projection_close_to_exhaustive_oracle_3x3(self):
        rng = np.random.default_rng(5)
        from haptiforge.perception import _project_monotone
        for _ in range(8):
            base = np.array([[3.0, 3.5, 4.0], [2.0, 3.0, 3.5], [1.0, 2.0, 3.0]])
            data = np.clip(base + rng.normal(0, 0.7, (3, 3)), 1, 5)
            proj = _project_monotone(data)
            assert np.all(proj[:-1, :] >= proj[1:, :] - 1e-9)
            assert np.all(proj[:, :-1] <= proj[:, 1:] + 1e-9)
            sse_proj = float(((proj - data) ** 2).sum())
            n_levels = 9
            sse_oracle = oracle_monotone_best_sse(data, n_levels)
            # allow the oracle's discretization budget
            step = (data.max() - data.min()) / (n_levels - 1)
            assert sse_proj <= sse_oracle + 9 * (step / 2) ** 2

    def test_bad_rating_rejected(self):
        with pytest.raises(BadRating):
            RatingRecord(participant_id="p", trial=0, frequency_hz=50.0,
                         duty=0.10, rating=6)

    def test_off_grid_rejected_unless_flagged(self):
        with pytest.raises(BadRating):
            RatingRecord(participant_id="p", trial=0, frequency_hz=60.0,
                         duty=0.10, rating=3)
        RatingRecord(participant_id="p", trial=0, frequency_hz=60.0,
                     duty=0.10, rating=3, free_grid=True)


class TestPredict:
    def test_grid_node_identity(self):
        surface = fit_surface(make_records(monotone_level))
        for i, f in enumerate(STUDY_FREQUENCIES_HZ):
            for j, d in enumerate(STUDY_DUTIES):
                assert predict(surface, f, d) == pytest.approx(
                    float(surface.grid[i, j]), abs=1e-12)

    def test_constant_surface_midpoints(self):
        surface = fit_surface(make_records(lambda f, d: 3))
        assert predict(surface, 35.0, 0.075) == pytest.approx(3.0, abs=1e-12)

    def test_random_queries_match_oracle(self):
        surface = fit_surface(make_records(monotone_level))
        rng = np.random.default_rng(17)
        for _ in range(100):
            f = 10 ** rng.uniform(1.0, math.log10(500.0))
            d = rng.uniform(0.02, 0.50)
            assert predict(surface, f, d) == pytest.approx(
                oracle_bilinear(surface, f, d), abs=1e-12)

    def test_continuity_across_cell_edges(self):
        surface = fit_surface(make_records(monotone_level))
        for f_edge in STUDY_FREQUENCIES_HZ[1:-1]:
            for d in np.linspace(0.02, 0.5, 7):
                lo = predict(surface, f_edge - 1e-9, float(d))
                hi = predict(surface, f_edge + 1e-9, float(d))
                assert lo == pytest.approx(hi, abs=1e-6)
        for d_edge in STUDY_DUTIES[1:-1]:
            for f in (10.0, 50.0, 500.0):
                lo = predict(surface, f, d_edge - 1e-12)
                hi = predict(surface, f, d_edge + 1e-12)
                assert lo == pytest.approx(hi, abs=1e-9)

    def test_out_of_domain(self):
        surface = fit_surface(make_records(lambda f, d: 3))
        with pytest.raises(OutOfDomain):
            predict(surface, 5.0, 0.10)
        with pytest.raises(OutOfDomain):
            predict(surface, 50.0, 0.60)


class TestInvert:
    def test_lowest_charge_corner_on_constant_surface(self):
        surface = fit_surface(make_records(lambda f, d: 3))
        f, d = invert(surface, 3.0, ("lowest-charge",))
        assert f == pytest.approx(500.0)
        assert d == pytest.approx(0.02)

    def test_unreachable_target(self):
        surface = fit_surface(make_records(lambda f, d: 3))
        with pytest.raises(TargetUnreachable):
            invert(surface, 6.0)

    def test_inversion_matches_exhaustive_scan(self):
        surface = synthetic_default_surface()
        for target in (1.5, 2.0, 3.0, 4.0):
            f, d = invert(surface, target, ("lowest-charge",))
            assert abs(predict(surface, f, d) - target) <= 0.25
            # exhaustive scan over the same 50x50 refinement
            freqs = np.logspace(1, math.log10(500.0), 50)
            duts = np.linspace(0.02, 0.50, 50)
            best = None
            for ff in freqs:
                for dd in duts:
                    if abs(predict(surface, float(ff), float(dd)) - target) <= 0.25:
                        cost = dd / ff
                        if best is None or cost < best[0]:
                            best = (cost, float(ff), float(dd))
            assert best is not None
            assert f == pytest.approx(best[1]) and d == pytest.approx(best[2])

    def test_nearest_to_preference(self):
        surface = synthetic_default_surface()
        f, d = invert(surface, 3.0, ("nearest-to", 50.0, 0.10))
        assert abs(predict(surface, f, d) - 3.0) <= 0.25
        far_f, far_d = invert(surface, 3.0, ("lowest-charge",))

        def norm(ff, dd):
            return math.log10(ff / 50.0) ** 2 + (dd - 0.1) ** 2

        assert norm(f, d) <= norm(far_f, far_d) + 1e-12


class TestSurfaceSerialization:
    def test_round_trip(self):
        surface = synthetic_default_surface()
        again = IntensitySurface.from_dict(surface.to_dict())
        assert np.array_equal(again.grid, surface.grid)
        assert again.frequencies_hz == surface.frequencies_hz

    def test_csv_round_trip(self):
        records = make_records(monotone_level)
        text = records_to_csv(records)
        again = records_from_csv(text)
        assert len(again) == len(records)
        assert all(a.frequency_hz == b.frequency_hz and a.duty == b.duty
                   and a.rating == b.rating for a, b in zip(again, records))

    def test_csv_rejects_malformed_rows(self):
        header = "participant_id,trial,frequency_hz,duty_pct,rating"
        with pytest.raises(BadRating, match="line 2"):
            records_from_csv(header + "\np0,0,50\n")
        with pytest.raises(BadRating, match="line 2"):
            records_from_csv(header + "\np0,zero,50,10,3\n")
        with pytest.raises(BadRating):
            records_from_csv("wrong,header\n")

    def test_synthetic_surface_is_monotone_and_bounded(self):
        surface = synthetic_default_surface()
        g = surface.grid
        assert g.min() >= 1.0 and g.max() <= 5.0
        assert np.all(g[:-1, :] >= g[1:, :] - 1e-12)
        assert np.all(g[:, :-1] <= g[:, 1:] + 1e-12)
