import numpy as np
import pytest

from tune import baselines
from tune.baselines import Strategy, bo_gb_predict, bo_st_check, bo_tc_check, rs_step


class TestStrategy:
    def test_known_variants(self):
        for v in baselines.VARIANTS:
            Strategy(v)

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            Strategy("annealing")

    def test_variant_groups_are_disjoint(self):
        assert not set(baselines.MEASURED) & set(baselines.PREDICTIVE)


class TestRandomSampling:
    def test_only_unsampled_candidates(self):
        rng = np.random.default_rng(0)
        sampled = {0, 2, 4}
        for _ in range(50):
            assert rs_step(sampled, 6, rng) in {1, 3, 5}

    def test_exhausted_pool_raises(self):
        with pytest.raises(RuntimeError):
            rs_step({0, 1}, 2, np.random.default_rng(0))

    def test_seeded_reproducibility(self):
        a = [rs_step(set(), 100, np.random.default_rng(3)) for _ in range(5)]
        b = [rs_step(set(), 100, np.random.default_rng(3)) for _ in range(5)]
        assert a == b


class TestMeasuredChecks:
    def test_bo_st_boundary_inclusive(self):
        assert bo_st_check(50.0, 50.0)
        assert not bo_st_check(49.9, 50.0)

    def test_bo_tc_boundary_inclusive(self):
        assert bo_tc_check(40.0, 40.0)
        assert not bo_tc_check(39.0, 40.0)


class TestBoGb:
    def test_prediction_interpolates_training_data(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        y = [5.0, 5.0, 80.0, 80.0]
        assert bo_gb_predict(X, y, [0.5]) == pytest.approx(5.0, rel=0.05)
        assert bo_gb_predict(X, y, [10.5]) == pytest.approx(80.0, rel=0.05)

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(size=(20, 2))
        y = list(rng.uniform(1, 100, size=20))
        assert bo_gb_predict(X, y, X[0]) == bo_gb_predict(X, y, X[0])
