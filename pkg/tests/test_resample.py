import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imbr.errors import ClassIsMajority, ClassTooSmall, ConfigError, NoMajorityAvailable, UnknownClass
from imbr.knn import FeatureMatrix
from imbr.resample import (
    Auto,
    Explicit,
    ResampleConfig,
    adasyn,
    adasyn_allocation,
    geometric_smote,
    plan_targets,
    resample_dataset,
    resample_with_provenance,
    sample_rng,
    smote,
)
from imbr.synth import TABLE1_COUNTS
from oracles import brute_knn
from oracles import largest_remainder as lr_oracle


def random_matrix(rng, counts, d=3, spread=3.0):
    rows = np.vstack([rng.normal(loc=spread * c, size=(n, d)) for c, n in enumerate(counts)])
    labels = np.repeat(np.arange(len(counts)), counts)
    return FeatureMatrix(rows, labels)


@pytest.fixture(autouse=True)
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


class TestPlanTargets:
    def test_table1_auto(self):
        counts = dict(enumerate(TABLE1_COUNTS.values()))
        plan = plan_targets(counts, Auto())
        assert plan[22] == 13002 - 41 == 12961
        assert plan[0] == 0

    def test_balanced(self):
        assert plan_targets({0: 10, 1: 10}, Auto()) == {0: 0, 1: 0}

    def test_explicit(self):
        assert plan_targets({0: 3, 1: 9}, Explicit({0: 7})) == {0: 7, 1: 0}

    def test_unknown_class(self):
        with pytest.raises(UnknownClass):
            plan_targets({0: 3}, Explicit({5: 1}))

    def test_negative_explicit(self):
        with pytest.raises(ConfigError):
            Explicit({0: -1})


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"gsmote_truncation": 2},
            {"gsmote_deformation": -0.1},
            {"adasyn_beta": 0},
            {"k": 0},
            {"algorithm": "borderline"},
            {"gsmote_selection": "nearest"},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigError):
            ResampleConfig(**kwargs)

    def test_aliases(self):
        assert ResampleConfig(algorithm="G-SMOTE").algorithm == "gsmote"
        assert ResampleConfig(algorithm="Geometric-SMOTE").algorithm == "gsmote"


class TestSmote:
    def test_segment_example(self):
        m = FeatureMatrix(np.array([[0.0, 0], [2, 0], [9, 9]]), np.array([0, 0, 1]))
        b = smote(m, 0, 4, k=1, seed=3)
        assert len(b) == 4
        assert np.all(b.rows[:, 1] == 0)
        assert np.all((b.rows[:, 0] >= 0) & (b.rows[:, 0] <= 2))

    def test_identical_points(self):
        m = FeatureMatrix(np.array([[1.5, -2], [1.5, -2]]), np.array([0, 0]))
        b = smote(m, 0, 7, k=3)
        assert np.all(b.rows == [1.5, -2])

    def test_zero(self):
        m = FeatureMatrix(np.array([[0.0], [1]]), np.array([0, 0]))
        assert len(smote(m, 0, 0)) == 0

    def test_too_small(self):
        m = FeatureMatrix(np.array([[0.0], [1]]), np.array([0, 1]))
        with pytest.raises(ClassTooSmall):
            smote(m, 0, 3)

    def test_k_clamp_warns(self):
        m = FeatureMatrix(np.array([[0.0], [1], [2]]), np.array([0, 0, 0]))
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            smote(m, 0, 3, k=5)
        assert any("clamping k=5 to 2" in str(x.message) for x in w)

    def test_round_robin_centers(self, rng):
        m = random_matrix(rng, [7])
        b = smote(m, 0, 17, k=3)
        assert np.bincount(b.centers, minlength=7).tolist() == [3, 3, 3, 2, 2, 2, 2]

    def test_random_centers(self, rng):
        m = random_matrix(rng, [7])
        b = smote(m, 0, 50, k=3, center_selection="random")
        assert set(b.centers.tolist()) <= set(range(7))

    def test_per_sample_streams(self, rng):
        # the draws of sample s depend only on (seed, class, s)
        m = random_matrix(rng, [6, 6])
        b = smote(m, 1, 9, k=2, seed=42)
        for s in (0, 4, 8):
            assert b.draws[s] == sample_rng(42, 1, s).random(3)[1]
        longer = smote(m, 1, 20, k=2, seed=42)
        assert np.array_equal(longer.rows[:9], b.rows)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_convexity_against_knn_oracle(self, seed):
        rng = np.random.default_rng(seed)
        counts = rng.integers(2, 25, size=3).tolist()
        m = random_matrix(rng, counts, d=int(rng.integers(1, 5)))
        k = int(rng.integers(1, 6))
        cls = int(rng.integers(0, 3))
        b = smote(m, cls, 40, k=k, seed=seed)
        k_eff = min(k, counts[cls] - 1)
        rows, labels = m.rows.tolist(), m.labels.tolist()
        for row, (i, j, u) in zip(b.rows, b.provenance):
            expected = m.rows[i] + u * (m.rows[j] - m.rows[i])
            assert np.max(np.abs(row - expected)) <= 1e-9
            assert 0 <= u < 1
            assert labels[i] == labels[j] == cls
            assert j in [n for n, _ in brute_knn(rows, labels, i, k_eff, {cls})]


class TestGeometricSmote:
    def cfg(self, **kw):
        return ResampleConfig(algorithm="gsmote", **kw)

    def test_deformation_collapses_to_hyperplane(self, rng):
        m = random_matrix(rng, [30, 20], d=4)
        b = geometric_smote(m, 1, 200, self.cfg(gsmote_deformation=1.0, gsmote_truncation=0.0))
        for row, (c, s, _) in zip(b.rows, b.provenance):
            assert abs(np.dot(row - m.rows[c], m.rows[s] - m.rows[c])) <= 1e-9

    def test_zero_radius_returns_center(self):
        m = FeatureMatrix(np.array([[1.0, 1], [1, 1], [8, 8]]), np.array([0, 0, 1]))
        b = geometric_smote(m, 0, 10, self.cfg(gsmote_selection="minority"))
        assert np.all(b.rows == [1, 1])

    @pytest.mark.parametrize("selection", ["minority", "majority", "combined"])
    @pytest.mark.parametrize("truncation", [-1.0, -0.4, 0.0, 0.5, 1.0])
    @pytest.mark.parametrize("deformation", [0.0, 0.3, 1.0])
    def test_containment(self, rng, selection, truncation, deformation):
        m = random_matrix(rng, [25, 12, 6], d=3, spread=1.5)
        cfg = self.cfg(gsmote_selection=selection, gsmote_truncation=truncation, gsmote_deformation=deformation)
        b = geometric_smote(m, 2, 60, cfg)
        for row, (c, s, _) in zip(b.rows, b.provenance):
            radius = np.linalg.norm(m.rows[s] - m.rows[c])
            assert np.linalg.norm(row - m.rows[c]) <= radius * (1 + 1e-9)

    def test_truncation_one_keeps_half_ball(self, rng):
        m = random_matrix(rng, [40, 15], d=5, spread=1.0)
        b = geometric_smote(m, 1, 300, self.cfg(gsmote_truncation=1.0))
        for row, (c, s, _) in zip(b.rows, b.provenance):
            diff = m.rows[s] - m.rows[c]
            radius = np.linalg.norm(diff)
            g = (row - m.rows[c]) / radius
            assert np.dot(g, diff / radius) >= -1e-9

    def test_truncation_minus_one_keeps_opposite_half(self, rng):
        m = random_matrix(rng, [40, 15], d=5, spread=1.0)
        b = geometric_smote(m, 1, 300, self.cfg(gsmote_truncation=-1.0))
        for row, (c, s, _) in zip(b.rows, b.provenance):
            assert np.dot(row - m.rows[c], m.rows[s] - m.rows[c]) <= 1e-9

    def test_surface_selection_rules(self, rng):
        m = random_matrix(rng, [30, 10], d=2, spread=2.0)
        maj = geometric_smote(m, 1, 20, self.cfg(gsmote_selection="majority"))
        assert np.all(m.labels[maj.neighbors] == 0)
        mino = geometric_smote(m, 1, 20, self.cfg(gsmote_selection="minority"))
        assert np.all(m.labels[mino.neighbors] == 1)
        comb = geometric_smote(m, 1, 20, self.cfg(gsmote_selection="combined"))
        for (c, s, _), (_, smin, _), (_, smaj, _) in zip(comb.provenance, mino.provenance, maj.provenance):
            dist = lambda j: np.linalg.norm(m.rows[j] - m.rows[c])  # noqa: E731
            assert s in (smin, smaj)
            assert dist(s) == min(dist(smin), dist(smaj))

    def test_preconditions(self):
        only = FeatureMatrix(np.array([[0.0], [1]]), np.array([0, 0]))
        with pytest.raises(NoMajorityAvailable):
            geometric_smote(only, 0, 2, self.cfg(gsmote_selection="majority"))
        single = FeatureMatrix(np.array([[0.0], [1]]), np.array([0, 1]))
        with pytest.raises(ClassTooSmall):
            geometric_smote(single, 0, 2, self.cfg(gsmote_selection="minority"))
        # combined falls back to the majority surface for a lone member
        b = geometric_smote(single, 0, 2, self.cfg())
        assert b.neighbors.tolist() == [1, 1]


class TestAdasyn:
    def worked_example(self):
        rows = [(0, 0), (10, 10), (10.5, 10), (0, 1), (1, 0), (0, -1), (15, 15)]
        return FeatureMatrix(np.array(rows, float), np.array([1, 1, 1, 0, 0, 0, 0]))

    def test_worked_example(self):
        m = self.worked_example()
        total, hostile, alloc = adasyn_allocation(m, 1, k=2, beta=1.0)
        assert total == 1
        assert hostile.tolist() == [2, 1, 1]
        assert (hostile / hostile.sum()).tolist() == [0.5, 0.25, 0.25]
        assert alloc.tolist() == [1, 0, 0]
        b = adasyn(m, 1, k=2, beta=1.0, seed=5)
        assert b.centers.tolist() == [0]

    def test_balanced_gives_nothing(self, rng):
        m = random_matrix(rng, [10, 10])
        assert len(adasyn(m, 0, k=3)) == 0

    def test_majority_rejected(self, rng):
        m = random_matrix(rng, [12, 10])
        with pytest.raises(ClassIsMajority):
            adasyn(m, 0, k=3)

    def test_uniform_fallback(self):
        rows = [(0, 0), (0.1, 0), (50, 50), (51, 50), (50, 51), (51, 51), (52, 52), (52, 50)]
        m = FeatureMatrix(np.array(rows, float), np.array([1, 1, 0, 0, 0, 0, 0, 0]))
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            total, hostile, alloc = adasyn_allocation(m, 1, k=1)
        assert total == 4 and hostile.tolist() == [0, 0]
        assert alloc.tolist() == [2, 2]
        assert any("uniformly" in str(x.message) for x in w)

    def test_beta_rounding(self, rng):
        m = random_matrix(rng, [20, 5])
        assert adasyn_allocation(m, 1, k=3, beta=0.5)[0] == round(0.5 * 15 + 1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_allocation_against_oracle(self, seed):
        rng = np.random.default_rng(seed)
        counts = [int(rng.integers(15, 40)), int(rng.integers(2, 14))]
        m = random_matrix(rng, counts, d=2, spread=float(rng.uniform(0, 3)))
        k = int(rng.integers(1, 7))
        beta = float(rng.uniform(0.1, 1.0))
        total, hostile, alloc = adasyn_allocation(m, 1, k=k, beta=beta)
        rows, labels = m.rows.tolist(), m.labels.tolist()
        members = np.flatnonzero(m.labels == 1)
        expected = [sum(labels[j] != 1 for j, _ in brute_knn(rows, labels, i, k)) for i in members]
        assert hostile.tolist() == expected
        assert alloc.sum() == total
        assert alloc.tolist() == lr_oracle(expected, total)
        if sum(expected):
            assert all(a == 0 for a, r in zip(alloc, expected) if r == 0)


class TestResampleDataset:
    def test_auto_smote_balances(self, rng):
        m = random_matrix(rng, [100, 10, 5])
        out = resample_dataset(m, ResampleConfig("smote"))
        assert np.bincount(out.labels).tolist() == [100, 100, 100]

    def test_original_rows_pass_through(self, rng):
        m = random_matrix(rng, [30, 8, 4])
        for alg in ("smote", "gsmote", "adasyn"):
            out = resample_dataset(m, ResampleConfig(alg))
            assert np.array_equal(out.rows[: m.n], m.rows)
            assert np.array_equal(out.labels[: m.n], m.labels)
            # synthetic block grouped by ascending class id
            assert np.all(np.diff(out.labels[m.n :]) >= 0)

    def test_single_minority_reduces_to_smote(self, rng):
        m = random_matrix(rng, [20, 6])
        out, batches = resample_with_provenance(m, ResampleConfig("smote", k=3, seed=9))
        ref = smote(m, 1, 14, k=3, seed=9)
        assert np.array_equal(out.rows[m.n :], ref.rows)

    def test_adasyn_reaches_majority(self, rng):
        m = random_matrix(rng, [50, 17, 9], spread=1.0)
        out = resample_dataset(m, ResampleConfig("adasyn", adasyn_beta=1.0))
        assert np.bincount(out.labels).tolist() == [50, 50, 50]

    def test_explicit_strategy(self, rng):
        m = random_matrix(rng, [20, 6])
        out = resample_dataset(m, ResampleConfig("gsmote", strategy=Explicit({0: 3, 1: 2})))
        assert np.bincount(out.labels).tolist() == [23, 8]

    def test_needs_two_classes(self, rng):
        with pytest.raises(ConfigError):
            resample_dataset(random_matrix(rng, [10]), ResampleConfig())

    def test_balanced_warns_and_returns_input(self, rng):
        m = random_matrix(rng, [10, 10])
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            out = resample_dataset(m, ResampleConfig("adasyn"))
        assert out is m
        assert w

    @pytest.mark.parametrize("alg", ["smote", "gsmote", "adasyn"])
    def test_determinism(self, rng, alg):
        m = random_matrix(rng, [40, 12, 7], spread=1.0)
        a = resample_dataset(m, ResampleConfig(alg, seed=11))
        b = resample_dataset(m, ResampleConfig(alg, seed=11))
        c = resample_dataset(m, ResampleConfig(alg, seed=12))
        assert a.rows.tobytes() == b.rows.tobytes()
        assert np.any(np.any(a.rows[m.n :] != c.rows[m.n :], axis=1))
