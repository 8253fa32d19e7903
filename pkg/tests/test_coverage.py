import math

import numpy as np
import pytest

import oracle
from radarbench import coverage, radar, terrain
from radarbench.coverage import (BudgetExhaustedError, DivergenceError,
                                 EvaluationCounter, Instance, TOTAL_VOXELS,
                                 counting_objective, fitness)

# Frozen reference values, computed with the scalar oracle in tests/oracle.py.
FLAT_ZERO_CENTRE_COVERED = 16_564
HILLS3_RNG42_COVERED = 7_603


def rng42_vector():
    return np.random.default_rng(42).uniform(0, 1, 15)


class TestCoverage:
    def test_flat_zero_golden_value(self, flat_instance):
        cfg = radar.decode(np.full(15, 0.5))
        res = coverage.coverage(flat_instance, cfg)
        assert res.covered == FLAT_ZERO_CENTRE_COVERED
        cov, _ = oracle.oracle_coverage(flat_instance, cfg)
        assert cov == FLAT_ZERO_CENTRE_COVERED

    def test_hills_golden_value(self, hilly_instance):
        cfg = radar.decode(rng42_vector())
        res = coverage.coverage(hilly_instance, cfg)
        assert res.covered == HILLS3_RNG42_COVERED
        cov, _ = oracle.oracle_coverage(hilly_instance, cfg)
        assert cov == HILLS3_RNG42_COVERED

    def test_result_shape_and_counts(self, flat_instance):
        res = coverage.coverage(flat_instance, radar.decode(np.full(15, 0.5)))
        assert res.map.shape == (30, 30, 30)
        assert res.map.dtype == np.bool_
        assert int(res.map.sum()) == res.covered
        assert res.covered + res.uncovered == TOTAL_VOXELS

    def test_matches_oracle_map_exactly(self, hilly_instance):
        cfg = radar.decode(np.random.default_rng(9).uniform(0, 1, 15))
        res = coverage.coverage(hilly_instance, cfg)
        cov, cover = oracle.oracle_coverage(hilly_instance, cfg)
        assert res.covered == cov
        assert np.array_equal(res.map, np.array(cover))

    def test_deterministic(self, hilly_instance):
        v = rng42_vector()
        assert fitness(hilly_instance, v) == fitness(hilly_instance, v)

    def test_fitness_complements_covered(self, flat_instance):
        v = np.full(15, 0.5)
        res = coverage.coverage(flat_instance, radar.decode(v))
        assert fitness(flat_instance, v) == float(TOTAL_VOXELS - res.covered)

    def test_higher_tau_never_covers_more(self, hilly_instance):
        strict = Instance(grid=hilly_instance.grid, tau=0.95)
        v = rng42_vector()
        assert fitness(strict, v) >= fitness(hilly_instance, v)

    def test_fused_pd_dominates_any_three_radar_subset(self, hilly_instance):
        """Dropping a radar from the fusion product can only lose voxels."""
        g = hilly_instance.grid
        phys = hilly_instance.physics
        cfg = radar.decode(rng42_vector())
        rng = np.random.default_rng(1)
        for _ in range(40):
            vox = radar.Voxel(int(rng.integers(30)), int(rng.integers(30)),
                              int(rng.integers(30)))
            singles = [radar.single_detection_probability(g, phys, r, vox)
                       for r in cfg.radars]
            fused = radar.network_detection_probability(g, phys, cfg, vox)
            for skip in range(4):
                prod = 1.0
                for i, p in enumerate(singles):
                    if i != skip:
                        prod *= (1.0 - p)
                assert fused >= (1.0 - prod) - 1e-15

    def test_decode_error_propagates(self, flat_instance):
        with pytest.raises(radar.DecodeError):
            fitness(flat_instance, np.full(15, 2.0))

    def test_instance_validation(self):
        small = terrain.ElevationGrid(np.zeros((10, 10)))
        with pytest.raises(ValueError):
            Instance(grid=small)
        ok = terrain.ElevationGrid(np.zeros((30, 30)))
        with pytest.raises(ValueError):
            Instance(grid=ok, tau=1.0)


class TestEvaluationCounter:
    def sphere(self, v):
        return float(np.sum(np.square(np.asarray(v) - 0.3)))

    def test_counts_and_budget(self):
        c = EvaluationCounter(self.sphere, budget=5)
        for _ in range(5):
            c(np.full(15, 0.5))
        assert c.count == 5
        assert c.remaining == 0
        with pytest.raises(BudgetExhaustedError):
            c(np.full(15, 0.5))
        assert c.count == 5

    def test_first_evaluation_always_recorded(self):
        c = EvaluationCounter(self.sphere)
        c(np.full(15, 0.5))
        assert c.improvements == [(1, pytest.approx(15 * 0.04))]

    def test_improvements_strictly_decreasing(self):
        c = EvaluationCounter(self.sphere)
        rng = np.random.default_rng(0)
        for _ in range(200):
            c(rng.uniform(0, 1, 15))
        evals = [e for e, _ in c.improvements]
        vals = [v for _, v in c.improvements]
        assert evals[0] == 1
        assert evals == sorted(evals)
        assert len(set(evals)) == len(evals)
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] == c.best_value

    def test_equal_value_not_recorded(self):
        c = EvaluationCounter(lambda v: 7.0)
        c([0.0])
        c([0.0])
        c([0.0])
        assert c.improvements == [(1, 7.0)]

    def test_best_vector_tracks_best_value(self):
        c = EvaluationCounter(self.sphere)
        rng = np.random.default_rng(1)
        for _ in range(50):
            c(rng.uniform(0, 1, 15))
        assert self.sphere(c.best_vector) == c.best_value

    def test_nan_raises_divergence(self):
        vals = iter([3.0, 2.0, float("nan")])
        c = EvaluationCounter(lambda v: next(vals))
        c([0])
        c([0])
        with pytest.raises(DivergenceError, match="evaluation 3"):
            c([0])
        # the failed call still consumed budget; the trajectory survives
        assert c.count == 3
        assert c.improvements == [(1, 3.0), (2, 2.0)]

    def test_observe_matches_call_semantics(self):
        c = EvaluationCounter(None, budget=3)
        c.observe(5.0)
        c.observe(6.0)
        c.observe(4.0)
        assert c.improvements == [(1, 5.0), (3, 4.0)]
        with pytest.raises(BudgetExhaustedError):
            c.observe(1.0)

    def test_counting_objective_on_instance(self, flat_instance):
        c = counting_objective(flat_instance, budget=3)
        assert c.name == "flat-zero"
        f = c(np.full(15, 0.5))
        assert f == float(TOTAL_VOXELS - FLAT_ZERO_CENTRE_COVERED)
        assert c.count == 1

    def test_bad_budget(self):
        with pytest.raises(ValueError):
            EvaluationCounter(self.sphere, budget=0)
