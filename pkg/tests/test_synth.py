"""Synthetic generator: determinism, calibration honesty, and the overconfident regime."""

from __future__ import annotations

import math

import numpy as np
import pytest

import fedconformal as fc


class TestGeneratorSpec:
    def test_rejects_nonpositive_fields(self):
        with pytest.raises(fc.InvalidSpecError):
            fc.GeneratorSpec(0, 5)
        with pytest.raises(fc.InvalidSpecError):
            fc.GeneratorSpec(10, 1)
        with pytest.raises(fc.InvalidSpecError):
            fc.GeneratorSpec(10, 5, concentration=0.0)
        with pytest.raises(fc.InvalidSpecError):
            fc.GeneratorSpec(10, 5, temperature=-1.0)

    def test_rejects_wrong_weight_length(self):
        with pytest.raises(fc.InvalidSpecError):
            fc.GeneratorSpec(10, 3, class_weights=(1.0, 2.0))


class TestGenerate:
    def test_deterministic_bit_identical(self):
        spec = fc.GeneratorSpec(500, 7, concentration=0.8, temperature=0.5, seed=42)
        a, b = fc.generate(spec), fc.generate(spec)
        assert np.array_equal(a.probs, b.probs)
        assert np.array_equal(a.labels, b.labels)

    def test_rows_are_valid_score_matrix(self):
        m = fc.generate(fc.GeneratorSpec(1000, 5, temperature=0.3, seed=9))
        assert m.n_rows == 1000 and m.n_classes == 5
        assert np.all(np.abs(m.probs.sum(axis=1) - 1.0) < 1e-9)

    def test_label_score_coupling_at_temperature_one(self):
        # labels come from the rows themselves, so the mean reported score of
        # class y among rows labeled y must beat its unconditional mean
        m = fc.generate(fc.GeneratorSpec(10000, 5, seed=123))
        for y in range(5):
            assert m.probs[m.labels == y, y].mean() > m.probs[:, y].mean()

    def test_high_concentration_approaches_uniform(self):
        m = fc.generate(fc.GeneratorSpec(200, 6, concentration=1e6, seed=1))
        assert fc.row_entropies(m).min() == pytest.approx(math.log(6), abs=1e-3)

    def test_class_weights_skew_marginals(self):
        m = fc.generate(fc.GeneratorSpec(5000, 3, class_weights=(8.0, 1.0, 1.0), seed=4))
        counts = np.bincount(m.labels, minlength=3)
        assert counts[0] > counts[1] and counts[0] > counts[2]

    def test_temperature_below_one_sharpens(self):
        base = fc.GeneratorSpec(2000, 6, seed=31)
        sharp = fc.GeneratorSpec(2000, 6, temperature=0.3, seed=31)
        assert fc.row_entropies(fc.generate(sharp)).mean() < fc.row_entropies(
            fc.generate(base)
        ).mean()


class TestSplitSynthetic:
    def test_shapes_and_exhaustiveness(self):
        calibs, test = fc.split_synthetic(fc.GeneratorSpec(1, 5, seed=2), 4, 500, 1000)
        assert len(calibs) == 4
        assert all(c.n_rows == 500 for c in calibs)
        assert test.n_rows == 1000
        total = sum(c.n_rows for c in calibs) + test.n_rows
        assert total == 4 * 500 + 1000
        stacked = np.vstack([c.probs for c in calibs] + [test.probs])
        assert len({tuple(r) for r in stacked}) == total  # disjoint rows

    def test_degenerate_single_client(self):
        calibs, test = fc.split_synthetic(fc.GeneratorSpec(1, 4, seed=2), 1, 50, 25)
        assert len(calibs) == 1 and calibs[0].n_rows == 50 and test.n_rows == 25

    def test_rejects_nonpositive_counts(self):
        with pytest.raises(fc.InvalidSpecError):
            fc.split_synthetic(fc.GeneratorSpec(1, 4), 0, 10, 10)


class TestCalibrationRegimes:
    def test_naive_honest_when_scores_calibrated(self):
        # temperature 1: reported scores equal the label-generating rows, so
        # the uncalibrated construction is valid to within its crossing-class
        # overshoot; C=30 keeps that overshoot small
        m = fc.generate(fc.GeneratorSpec(10000, 30, seed=77))
        sets = [fc.naive_prediction_set(m.probs[i], 0.1, i) for i in range(m.n_rows)]
        assert fc.empirical_coverage(sets, m.labels) == pytest.approx(0.9, abs=0.02)

    def test_overconfident_scores_break_naive_but_not_conformal(self):
        spec = fc.GeneratorSpec(1, 9, temperature=0.3, seed=11)
        calibs, _ = fc.split_synthetic(spec, 1, 1000, 1)
        test = fc.generate(
            fc.GeneratorSpec(10000, 9, temperature=0.3, seed=12)
        )
        naive_sets = [fc.naive_prediction_set(test.probs[i], 0.1, i) for i in range(test.n_rows)]
        naive_cov = fc.empirical_coverage(naive_sets, test.labels)
        assert naive_cov <= 0.9 - 0.03

        qhat = fc.calibrate_quantile(fc.aps_conformity_scores(calibs[0]), 0.1)
        aps_sets = [fc.aps_prediction_set(test.probs[i], qhat, i) for i in range(test.n_rows)]
        assert fc.empirical_coverage(aps_sets, test.labels) >= 0.88
