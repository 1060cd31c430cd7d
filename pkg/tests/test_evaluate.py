import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imbr.errors import ClassOutOfRange, LengthMismatch, TooFewRows
from imbr.evaluate import FoldPlan, confusion, cross_validate, majority_classifier, metrics, stratified_kfold
from imbr.knn import FeatureMatrix
from imbr.linear import ClassifierSpec
from imbr.resample import ResampleConfig
from oracles import recount_metrics


class TestStratifiedKFold:
    def test_exact_divisibility(self):
        plan = stratified_kfold([0] * 5 + [1] * 5, 5, seed=1)
        for f in range(5):
            assert sorted(np.array([0] * 5 + [1] * 5)[plan.test_index(f)].tolist()) == [0, 1]

    def test_seven_members(self):
        plan = stratified_kfold([0] * 7, 5, seed=2)
        assert sorted(np.bincount(plan.assignments).tolist()) == [1, 1, 1, 2, 2]

    def test_deterministic(self):
        labels = np.random.default_rng(0).integers(0, 4, 50)
        a = stratified_kfold(labels, 5, seed=9).assignments
        b = stratified_kfold(labels, 5, seed=9).assignments
        assert np.array_equal(a, b)

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            stratified_kfold([0, 1, 0], 5)

    def test_small_class_warns(self):
        with pytest.warns(UserWarning):
            stratified_kfold([0] * 10 + [1] * 2, 5)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 5), min_size=10, max_size=80), st.sampled_from([2, 3, 5, 10]), st.integers(0, 99))
    def test_invariants(self, labels, K, seed):
        labels = np.array(labels)
        if labels.size < K:
            return
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            plan = stratified_kfold(labels, K, seed)
        assert set(plan.assignments.tolist()) == set(range(K))
        for c in np.unique(labels):
            per_fold = np.bincount(plan.assignments[labels == c], minlength=K)
            assert per_fold.max() - per_fold.min() <= 1


class TestConfusion:
    def test_identity(self):
        assert confusion([0, 1, 2], [0, 1, 2], 3).tolist() == np.eye(3, dtype=int).tolist()

    def test_hand_count(self):
        assert confusion([0, 0, 1, 1], [0, 1, 1, 1], 2).tolist() == [[1, 1], [0, 2]]

    def test_empty(self):
        assert confusion([], [], 2).tolist() == [[0, 0], [0, 0]]

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            confusion([0], [0, 1], 2)
        with pytest.raises(ClassOutOfRange):
            confusion([0, 2], [0, 1], 2)


class TestMetrics:
    def test_hand_example(self):
        r = metrics([[1, 1], [0, 2]])
        assert r.accuracy == 0.75
        assert r.precision.tolist() == pytest.approx([1.0, 2 / 3])
        assert r.recall.tolist() == [0.5, 1.0]
        assert r.f1.tolist() == pytest.approx([2 / 3, 0.8])
        assert r.macro["f1"] == pytest.approx(0.7333, abs=1e-4)

    def test_perfect(self):
        r = metrics(np.diag([3, 4, 5]))
        assert r.headline == (1.0, 1.0, 1.0, 1.0)

    def test_empty(self):
        r = metrics(np.zeros((3, 3), int))
        assert r.headline == (0.0, 0.0, 0.0, 0.0)

    def test_zero_division_is_zero(self):
        r = metrics([[2, 0], [3, 0]])
        assert r.precision[1] == 0 and r.recall[1] == 0 and r.f1[1] == 0

    def test_macro_skips_absent_true_classes(self):
        r = metrics([[2, 1, 0], [0, 0, 0], [0, 0, 3]])
        assert r.macro["recall"] == pytest.approx((2 / 3 + 1) / 2)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 6).flatmap(lambda C: st.lists(st.lists(st.integers(0, 50), min_size=C, max_size=C), min_size=C, max_size=C)))
    def test_matches_rational_recount(self, cm):
        got = metrics(cm)
        ref = recount_metrics(cm)
        assert abs(got.accuracy - ref["accuracy"]) <= 1e-12
        for key in ("precision", "recall", "f1"):
            assert np.max(np.abs(getattr(got, key) - np.array([float(v) for v in ref[key]]))) <= 1e-12
            assert abs(got.macro[key] - ref[f"macro_{key}"]) <= 1e-12

    def test_macro_f1_relabel_invariant(self, rng):
        cm = rng.integers(0, 20, size=(5, 5))
        perm = rng.permutation(5)
        assert metrics(cm).macro["f1"] == pytest.approx(metrics(cm[np.ix_(perm, perm)]).macro["f1"], abs=1e-15)


def blob_matrix(rng, counts, d=3, spread=3.0):
    rows = np.vstack([rng.normal(loc=spread * c, size=(n, d)) for c, n in enumerate(counts)])
    return FeatureMatrix(rows, np.repeat(np.arange(len(counts)), counts))


class TestCrossValidate:
    def test_majority_predictor_on_balanced(self, rng):
        m = blob_matrix(rng, [10, 10])
        r = cross_validate(m, None, majority_classifier, 5, seed=0)
        assert r.accuracy == 0.5
        assert len(r.folds) == 5

    @pytest.mark.parametrize("alg", ["smote", "gsmote", "adasyn"])
    def test_no_leakage(self, rng, alg):
        m = blob_matrix(rng, [60, 15, 8], spread=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = cross_validate(m, ResampleConfig(alg), ClassifierSpec("softmax"), 5, seed=3)
        for audit in r.audits:
            assert audit.n_synthetic > 0
            assert np.all(audit.synthetic_ids >= m.n)
            assert not set(audit.test_ids.tolist()) & set(audit.synthetic_ids.tolist())
            assert not set(audit.sources.ravel().tolist()) & set(audit.test_ids.tolist())

    def test_deterministic(self, rng):
        m = blob_matrix(rng, [40, 10, 6], spread=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = cross_validate(m, ResampleConfig("gsmote", seed=1), ClassifierSpec(), 5, seed=4)
            b = cross_validate(m, ResampleConfig("gsmote", seed=1), ClassifierSpec(), 5, seed=4)
        assert a.to_dict() == b.to_dict()

    def test_row_order_invariance_given_same_plan(self, rng):
        m = FeatureMatrix(rng.integers(0, 6, size=(60, 5)).astype(float), rng.integers(0, 3, 60))
        plan = stratified_kfold(m.labels, 5, seed=7)
        base = cross_validate(m, None, ClassifierSpec("nb"), plan=plan)
        perm = rng.permutation(m.n)
        shuffled = FeatureMatrix(m.rows[perm], m.labels[perm])
        moved = FoldPlan(plan.assignments[perm], plan.n_folds, plan.seed)
        other = cross_validate(shuffled, None, ClassifierSpec("nb"), plan=moved)
        assert base.to_dict() == other.to_dict()

    def test_report_values_in_unit_interval(self, rng):
        m = blob_matrix(rng, [30, 12, 5], spread=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = cross_validate(m, ResampleConfig("smote"), ClassifierSpec(), 5, seed=0)
        vals = [r.accuracy, *r.macro.values(), *r.micro.values(), *r.weighted.values()]
        assert all(0 <= v <= 1 for v in vals)
        assert r.confusion.sum() == m.n
