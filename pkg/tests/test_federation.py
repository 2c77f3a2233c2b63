"""Institution partitioning, label-noise injection, and quantile averaging."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fedconformal as fc


def uniform_matrix(n, n_classes, labels=None):
    probs = np.full((n, n_classes), 1.0 / n_classes)
    if labels is None:
        labels = np.zeros(n, dtype=int)
    return fc.ScoreMatrix(probs, labels)


def constant_score_institution(inst_id, qhat, n=10):
    # rows [q, 1-q] with label 0 give every example the APS conformity score q
    probs = np.column_stack([np.full(n, qhat), np.full(n, 1.0 - qhat)])
    return fc.Institution(inst_id, fc.ScoreMatrix(probs, np.zeros(n, dtype=int)))


class TestPartitionDataset:
    def test_eight_rows_into_four(self):
        m = uniform_matrix(8, 3, labels=np.arange(8) % 3)
        parts = fc.partition_dataset(m, 4, seed=1)
        assert [p.n_rows for p in parts] == [2, 2, 2, 2]

    def test_ten_rows_into_four_sizes(self):
        m = uniform_matrix(10, 3, labels=np.arange(10) % 3)
        parts = fc.partition_dataset(m, 4, seed=1)
        assert [p.n_rows for p in parts] == [3, 3, 2, 2]

    def test_disjoint_and_exhaustive(self):
        rng = np.random.default_rng(3)
        probs = rng.dirichlet(np.ones(4), size=20)
        labels = rng.integers(0, 4, 20)
        m = fc.ScoreMatrix(probs, labels)
        parts = fc.partition_dataset(m, 3, seed=9)
        assert sum(p.n_rows for p in parts) == 20
        stacked = np.vstack([p.probs for p in parts])
        # every original row appears exactly once
        original = {tuple(r) for r in probs}
        recovered = [tuple(r) for r in stacked]
        assert len(recovered) == len(set(recovered)) == 20
        assert set(recovered) == original

    def test_deterministic(self):
        m = uniform_matrix(11, 2, labels=np.arange(11) % 2)
        a = fc.partition_dataset(m, 3, seed=5)
        b = fc.partition_dataset(m, 3, seed=5)
        for pa, pb in zip(a, b):
            assert np.array_equal(pa.probs, pb.probs)
            assert np.array_equal(pa.labels, pb.labels)

    def test_too_few_rows(self):
        with pytest.raises(fc.TooFewRowsError):
            fc.partition_dataset(uniform_matrix(3, 2), 4, seed=0)


class TestInjectLabelNoise:
    def test_fraction_zero_is_identity(self):
        m = uniform_matrix(50, 4, labels=np.arange(50) % 4)
        out = fc.inject_label_noise(m, 0.0, seed=1)
        assert np.array_equal(out.labels, m.labels)

    def test_fraction_one_binary_flips_about_half(self):
        rng = np.random.default_rng(0)
        labels = rng.integers(0, 2, 1000)
        m = fc.ScoreMatrix(np.full((1000, 2), 0.5), labels)
        out = fc.inject_label_noise(m, 1.0, seed=7)
        flipped = (out.labels != labels).mean()
        assert 0.45 <= flipped <= 0.55

    def test_exactly_thirty_of_hundred_selected(self):
        # C=50 and this seed: no resampled label coincides with the original,
        # so the differing-row count equals the floor(0.3 * 100) selection
        m = uniform_matrix(100, 50)
        out = fc.inject_label_noise(m, 0.3, seed=0)
        assert int((out.labels != m.labels).sum()) == 30

    def test_input_unmodified_and_scores_shared(self):
        labels = np.arange(20) % 3
        m = fc.ScoreMatrix(np.full((20, 3), 1.0 / 3.0), labels.copy())
        out = fc.inject_label_noise(m, 0.5, seed=2)
        assert np.array_equal(m.labels, labels)
        assert np.array_equal(out.probs, m.probs)

    def test_missing_labels(self):
        with pytest.raises(fc.MissingLabelsError):
            fc.inject_label_noise(fc.ScoreMatrix(np.full((5, 2), 0.5)), 0.3, seed=0)

    def test_bad_fraction(self):
        m = uniform_matrix(5, 2)
        with pytest.raises(fc.ValidationError):
            fc.inject_label_noise(m, 1.5, seed=0)

    @given(fraction=st.floats(0.0, 1.0), seed=st.integers(0, 2**31))
    @settings(max_examples=50, deadline=None)
    def test_deterministic_given_seed(self, fraction, seed):
        m = uniform_matrix(40, 6, labels=np.arange(40) % 6)
        a = fc.inject_label_noise(m, fraction, seed)
        b = fc.inject_label_noise(m, fraction, seed)
        assert np.array_equal(a.labels, b.labels)


class TestLocalQuantile:
    def test_no_noise_is_plain_calibration(self):
        rng = np.random.default_rng(8)
        probs = rng.dirichlet(np.ones(5), size=200)
        labels = rng.integers(0, 5, 200)
        m = fc.ScoreMatrix(probs, labels)
        inst = fc.Institution(0, m, 0.0, 123)
        direct = fc.calibrate_quantile(fc.aps_conformity_scores(m), 0.1)
        assert fc.local_quantile(inst, 0.1).qhat == direct.qhat

    def test_identical_institutions_identical_quantiles(self):
        m = uniform_matrix(30, 4, labels=np.arange(30) % 4)
        a = fc.local_quantile(fc.Institution(0, m, 0.2, 99), 0.1)
        b = fc.local_quantile(fc.Institution(1, m, 0.2, 99), 0.1)
        assert a.qhat == b.qhat

    def test_noise_raises_quantile_on_confident_scores(self):
        # scores put 0.98 on the true class; shuffling labels pushes the
        # cumulative conformity of corrupted rows toward 1
        rng = np.random.default_rng(5)
        n, n_classes = 100, 5
        labels = rng.integers(0, n_classes, n)
        probs = np.full((n, n_classes), 0.02 / (n_classes - 1))
        probs[np.arange(n), labels] = 0.98
        m = fc.ScoreMatrix(probs, labels)
        clean = fc.local_quantile(fc.Institution(0, m, 0.0, 11), 0.1)
        noisy = fc.local_quantile(fc.Institution(1, m, 0.3, 11), 0.1)
        assert noisy.qhat >= clean.qhat

    def test_lac_method_dispatch(self):
        m = uniform_matrix(30, 4, labels=np.arange(30) % 4)
        assert fc.local_quantile(fc.Institution(0, m), 0.1, method="lac").method == "lac"


class TestFederatedQuantile:
    def test_single_institution_degenerate(self):
        inst = constant_score_institution(0, 0.8)
        config = fc.FederationConfig([inst], 0.1)
        fed = fc.federated_quantile(config)
        assert fed.qhat_global == fc.local_quantile(inst, 0.1).qhat

    def test_mean_of_08_and_09(self):
        config = fc.FederationConfig(
            [constant_score_institution(0, 0.8), constant_score_institution(1, 0.9)], 0.1
        )
        assert fc.federated_quantile(config).qhat_global == pytest.approx(0.85)

    def test_four_identical_institutions(self):
        insts = [constant_score_institution(i, 0.7) for i in range(4)]
        config = fc.FederationConfig(insts, 0.1)
        fed = fc.federated_quantile(config)
        assert fed.qhat_global == pytest.approx(0.7)
        assert len(fed.per_client) == 4

    def test_empty_federation_rejected(self):
        with pytest.raises(fc.FederationEmptyError):
            fc.FederationConfig([], 0.1)

    def test_mismatched_class_counts_rejected(self):
        a = fc.Institution(0, uniform_matrix(10, 3))
        b = fc.Institution(1, uniform_matrix(10, 4))
        with pytest.raises(fc.ValidationError):
            fc.FederationConfig([a, b], 0.1)

    @given(
        seeds=st.lists(st.integers(0, 10_000), min_size=1, max_size=16),
        alpha=st.sampled_from([0.05, 0.1, 0.2, 0.3]),
    )
    @settings(max_examples=40, deadline=None)
    def test_aggregation_identity_and_bounds(self, seeds, alpha):
        institutions = []
        for i, seed in enumerate(seeds):
            rng = np.random.default_rng(seed)
            probs = rng.dirichlet(np.ones(4), size=50)
            labels = rng.integers(0, 4, 50)
            institutions.append(fc.Institution(i, fc.ScoreMatrix(probs, labels)))
        fed = fc.federated_quantile(fc.FederationConfig(institutions, alpha))
        per = [c.qhat for c in fed.per_client]
        assert fed.qhat_global == pytest.approx(sum(per) / len(per), abs=1e-12)
        assert min(per) - 1e-12 <= fed.qhat_global <= max(per) + 1e-12
