import itertools
import math

import numpy as np
import pytest

from radarbench import selector as sel
from radarbench.ela import FEATURE_NAMES
from radarbench.optimizers import PORTFOLIO_NAMES
from radarbench.selector import PerformanceTable


def toy_table(entries, algorithms=("A", "B", "C"), budget=500):
    """entries: {instance: {algo: fitness}}"""
    values = {(inst, algo, budget): float(v)
              for inst, row in entries.items() for algo, v in row.items()}
    return PerformanceTable(values=values, algorithms=tuple(algorithms))


def random_table(rng, n_instances=8, algorithms=("A", "B", "C"), budget=500):
    entries = {f"inst{i}": {a: float(rng.uniform(1, 100)) for a in algorithms}
               for i in range(n_instances)}
    return toy_table(entries, algorithms, budget), [f"inst{i}" for i in range(n_instances)]


class TestPerformanceTable:
    def test_lookup_and_missing(self):
        t = toy_table({"x": {"A": 1, "B": 2, "C": 3}})
        assert t.value("x", "B", 500) == 2.0
        with pytest.raises(ValueError, match="no entry"):
            t.value("x", "B", 2500)

    def test_instances_per_budget(self):
        values = {("a", "A", 500): 1.0, ("b", "A", 500): 2.0, ("c", "A", 2500): 3.0}
        t = PerformanceTable(values=values, algorithms=("A",))
        assert t.instances(500) == ["a", "b"]
        assert t.instances(2500) == ["c"]

    def test_check_complete(self):
        t = toy_table({"x": {"A": 1, "B": 2}})  # C missing
        with pytest.raises(ValueError):
            t.check_complete(["x"], 500)

    def test_default_algorithm_order_is_portfolio(self):
        t = PerformanceTable(values={})
        assert t.algorithms == PORTFOLIO_NAMES


class TestVbsAndLoss:
    def test_vbs_strictly_best(self):
        t = toy_table({"x": {"A": 5, "B": 2, "C": 9}})
        assert sel.vbs(t, "x", 500) == ("B", 2.0)

    def test_vbs_tie_takes_first_in_order(self):
        t = toy_table({"x": {"A": 2, "B": 2, "C": 2}})
        assert sel.vbs(t, "x", 500)[0] == "A"

    def test_vbs_below_every_algorithm(self):
        t, insts = random_table(np.random.default_rng(0))
        for inst in insts:
            _, f = sel.vbs(t, inst, 500)
            assert all(f <= t.value(inst, a, 500) for a in t.algorithms)

    def test_loss_zero_for_vbs_itself(self):
        t = toy_table({"x": {"A": 5, "B": 2, "C": 9}})
        assert sel.relative_loss(t, "B", "x", 500) == 0.0

    def test_loss_percent_scale(self):
        t = toy_table({"x": {"A": 2.3, "B": 2.0, "C": 9.0}})
        assert sel.relative_loss(t, "A", "x", 500) == pytest.approx(15.0)

    def test_zero_vbs_sentinel(self):
        t = toy_table({"x": {"A": 0.0, "B": 5.0, "C": 0.0}})
        assert sel.relative_loss(t, "B", "x", 500) == math.inf
        assert sel.relative_loss(t, "C", "x", 500) == 0.0


class TestSbs:
    def test_lowest_median_loss_wins(self):
        entries = {
            "i1": {"A": 10.0, "B": 10.5, "C": 30.0},
            "i2": {"A": 20.0, "B": 20.4, "C": 60.0},
            "i3": {"A": 40.0, "B": 30.0, "C": 90.0},
        }
        t = toy_table(entries)
        assert sel.sbs(t, ["i1", "i2", "i3"], 500) == "A"

    def test_single_instance_reduces_to_vbs(self):
        t, insts = random_table(np.random.default_rng(1))
        inst = insts[0]
        assert sel.sbs(t, [inst], 500) == sel.vbs(t, inst, 500)[0]

    def test_sbs_median_loss_non_negative(self):
        t, insts = random_table(np.random.default_rng(2))
        algo = sel.sbs(t, insts, 500)
        assert sel.median_relative_loss(t, algo, insts, 500) >= 0.0

    def test_sandwich_invariant(self):
        t, insts = random_table(np.random.default_rng(3))
        algo = sel.sbs(t, insts, 500)
        for inst in insts:
            _, f_vbs = sel.vbs(t, inst, 500)
            f_sbs = t.value(inst, algo, 500)
            f_max = max(t.value(inst, a, 500) for a in t.algorithms)
            assert f_vbs <= f_sbs <= f_max

    def test_empty_instances_rejected(self):
        t, _ = random_table(np.random.default_rng(4))
        with pytest.raises(ValueError):
            sel.sbs(t, [], 500)


class TestSplit:
    def test_eighty_twenty_on_full_census(self):
        train_set, test_set = sel.split([f"i{k}" for k in range(153)], seed=0)
        assert len(train_set) == 122 and len(test_set) == 31

    def test_partition(self):
        insts = [f"i{k}" for k in range(20)]
        train_set, test_set = sel.split(insts, seed=5)
        assert set(train_set) | set(test_set) == set(insts)
        assert set(train_set) & set(test_set) == set()

    def test_deterministic_per_seed(self):
        insts = [f"i{k}" for k in range(20)]
        assert sel.split(insts, seed=3) == sel.split(insts, seed=3)
        assert sel.split(insts, seed=3) != sel.split(insts, seed=4)

    def test_too_few_instances(self):
        with pytest.raises(ValueError):
            sel.split(["a", "b", "c"], seed=0)


class TestSbsStability:
    def test_counts_sum_to_split_count(self):
        t, insts = random_table(np.random.default_rng(6), n_instances=10)
        counts = sel.sbs_stability(t, 500, n_splits=50, instances=insts)
        assert sum(counts.values()) == 50

    def test_dominant_algorithm_sweeps(self):
        entries = {f"i{k}": {"A": 1.0, "B": 2.0, "C": 3.0} for k in range(10)}
        t = toy_table(entries)
        counts = sel.sbs_stability(t, 500, n_splits=40)
        assert counts == {"A": 40}

    def test_deterministic(self):
        t, insts = random_table(np.random.default_rng(7), n_instances=12)
        a = sel.sbs_stability(t, 500, n_splits=30, instances=insts)
        b = sel.sbs_stability(t, 500, n_splits=30, instances=insts)
        assert a == b


def ecdf_oracle_d(a, b):
    """Brute force: sup of |F_a - F_b| over every pooled step point."""
    best = 0.0
    for v in sorted(set(a) | set(b)):
        fa = sum(1 for x in a if x <= v) / len(a)
        fb = sum(1 for x in b if x <= v) / len(b)
        best = max(best, abs(fa - fb))
    return best


class TestKsTest:
    def test_identical_never_rejected(self):
        r = sel.ks_test([3, 1, 4, 1, 5], [3, 1, 4, 1, 5])
        assert r.statistic == 0.0 and not r.reject

    def test_disjoint_supports(self):
        r = sel.ks_test(list(range(1, 31)), list(range(31, 61)))
        assert r.statistic == 1.0 and r.reject

    def test_critical_value_thirty_vs_thirty(self):
        r = sel.ks_test(list(range(30)), list(range(30)))
        assert r.critical == pytest.approx(1.628 * math.sqrt(60 / 900))

    def test_symmetry(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            a = rng.integers(1, 7, 5).tolist()
            b = rng.integers(1, 7, 5).tolist()
            r1, r2 = sel.ks_test(a, b), sel.ks_test(b, a)
            assert r1.statistic == r2.statistic and r1.reject == r2.reject

    def test_matches_ecdf_oracle_on_dice_samples(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            a = rng.integers(1, 7, 5).tolist()
            b = rng.integers(1, 7, 5).tolist()
            assert sel.ks_test(a, b).statistic == pytest.approx(
                ecdf_oracle_d(a, b), abs=1e-12)

    def test_unsupported_alpha(self):
        with pytest.raises(ValueError, match="alpha"):
            sel.ks_test([1, 2], [3, 4], alpha=0.05)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            sel.ks_test([], [1, 2])


def feature_map(rng, instances):
    return {i: rng.uniform(0, 1, len(FEATURE_NAMES)) for i in instances}


class TestTraining:
    def test_constant_target_predicts_exactly(self):
        rng = np.random.default_rng(10)
        entries = {f"i{k}": {"A": 3.5, "B": float(rng.uniform(1, 9)), "C": 1.0}
                   for k in range(6)}
        t = toy_table(entries)
        s = sel.train(feature_map(rng, entries), t, 500, seed=1)
        query = rng.uniform(0, 1, 33)
        assert sel.predict(s, query)["A"] == 3.5

    def test_predictions_bounded_by_training_targets(self):
        rng = np.random.default_rng(11)
        t, insts = random_table(rng, n_instances=10)
        s = sel.train(feature_map(rng, insts), t, 500, seed=2)
        preds = sel.predict(s, rng.uniform(0, 1, 33))
        for algo in t.algorithms:
            ys = [t.value(i, algo, 500) for i in insts]
            assert min(ys) <= preds[algo] <= max(ys)

    def test_same_seed_identical_predictions(self):
        rng = np.random.default_rng(12)
        t, insts = random_table(rng, n_instances=8)
        fm = feature_map(rng, insts)
        q = rng.uniform(0, 1, 33)
        p1 = sel.predict(sel.train(fm, t, 500, seed=9), q)
        p2 = sel.predict(sel.train(fm, t, 500, seed=9), q)
        assert p1 == p2

    def test_too_few_instances(self):
        rng = np.random.default_rng(13)
        t = toy_table({"only": {"A": 1, "B": 2, "C": 3}})
        with pytest.raises(ValueError, match="at least 2"):
            sel.train(feature_map(rng, ["only"]), t, 500, seed=0)

    def test_wrong_feature_width(self):
        rng = np.random.default_rng(14)
        t, insts = random_table(rng, n_instances=4)
        bad = {i: rng.uniform(0, 1, 7) for i in insts}
        with pytest.raises(ValueError, match="33"):
            sel.train(bad, t, 500, seed=0)

    def test_nan_training_features_imputed_by_column_median(self):
        rng = np.random.default_rng(15)
        t, insts = random_table(rng, n_instances=3)
        fm = feature_map(rng, insts)
        fm[insts[0]][0] = 1.0
        fm[insts[1]][0] = np.nan
        fm[insts[2]][0] = 3.0
        s = sel.train(fm, t, 500, seed=0)
        assert s.imputation[0] == 2.0


class TestSelect:
    def test_full_ranking_permutation(self):
        rng = np.random.default_rng(16)
        t, insts = random_table(rng, n_instances=8)
        s = sel.train(feature_map(rng, insts), t, 500, seed=3)
        ranking = sel.select(s, rng.uniform(0, 1, 33))
        assert sorted(ranking) == sorted(t.algorithms)

    def test_rank_one_has_minimal_prediction(self):
        rng = np.random.default_rng(17)
        t, insts = random_table(rng, n_instances=8)
        s = sel.train(feature_map(rng, insts), t, 500, seed=4)
        q = rng.uniform(0, 1, 33)
        preds = sel.predict(s, q)
        assert preds[sel.select(s, q)[0]] == min(preds.values())

    def test_prediction_tie_breaks_by_table_order(self):
        rng = np.random.default_rng(18)
        entries = {f"i{k}": {"A": 1.0, "B": 1.0, "C": 2.0} for k in range(5)}
        t = toy_table(entries)
        s = sel.train(feature_map(rng, entries), t, 500, seed=5)
        assert sel.select(s, rng.uniform(0, 1, 33))[:2] == ["A", "B"]

    def test_nan_query_features_are_imputed(self):
        rng = np.random.default_rng(19)
        t, insts = random_table(rng, n_instances=6)
        s = sel.train(feature_map(rng, insts), t, 500, seed=6)
        q = rng.uniform(0, 1, 33)
        q[4] = np.nan
        ranking = sel.select(s, q)
        assert len(ranking) == 3

    def test_wrong_length_query(self):
        rng = np.random.default_rng(20)
        t, insts = random_table(rng, n_instances=6)
        s = sel.train(feature_map(rng, insts), t, 500, seed=7)
        with pytest.raises(ValueError, match="expected 33"):
            sel.select(s, np.zeros(12))


class TestEvaluateSelector:
    def test_constant_table_gives_zero_loss(self):
        rng = np.random.default_rng(21)
        entries = {f"i{k}": {"A": 1.0, "B": 2.0, "C": 3.0} for k in range(6)}
        t = toy_table(entries)
        fm = feature_map(rng, entries)
        s = sel.train(fm, t, 500, seed=8)
        ev = sel.evaluate_selector(s, fm, t, list(entries), 500)
        assert ev.median_loss == 0.0
        assert all(p == "A" for p in ev.picks.values())

    def test_losses_non_negative(self):
        rng = np.random.default_rng(22)
        t, insts = random_table(rng, n_instances=10)
        fm = feature_map(rng, insts)
        s = sel.train(fm, t, 500, seed=9)
        ev = sel.evaluate_selector(s, fm, t, insts, 500)
        assert all(loss >= 0.0 for loss in ev.losses.values())
        assert ev.median_loss >= 0.0

    def test_median_is_lower_median_of_losses(self):
        rng = np.random.default_rng(23)
        t, insts = random_table(rng, n_instances=9)
        fm = feature_map(rng, insts)
        s = sel.train(fm, t, 500, seed=10)
        ev = sel.evaluate_selector(s, fm, t, insts, 500)
        assert ev.median_loss in list(ev.losses.values())


class TestBundle:
    def test_round_trip_predictions(self, tmp_path):
        rng = np.random.default_rng(24)
        t, insts = random_table(rng, n_instances=8)
        s = sel.train(feature_map(rng, insts), t, 500, seed=11)
        sel.save_bundle(s, str(tmp_path / "bundle"))
        s2 = sel.load_bundle(str(tmp_path / "bundle"))
        for _ in range(5):
            q = rng.uniform(0, 1, 33)
            assert sel.predict(s, q) == sel.predict(s2, q)
        assert s2.algorithms == s.algorithms
        assert s2.budget == 500 and s2.seed == 11
        assert np.array_equal(s2.imputation, s.imputation)

    def test_bundle_layout(self, tmp_path):
        rng = np.random.default_rng(25)
        t, insts = random_table(rng, n_instances=6)
        s = sel.train(feature_map(rng, insts), t, 500, seed=12)
        path = tmp_path / "bundle"
        sel.save_bundle(s, str(path))
        assert (path / "metadata.json").exists()
        for algo in t.algorithms:
            assert (path / f"forest_{algo}.joblib").exists()
        meta = (path / "metadata.json").read_text()
        assert '"feature_order"' in meta and '"imputation"' in meta
