import numpy as np
import pytest

from dmopt.core import ConfigurationError
from dmopt.posmote import (
    LabeledSampleSet,
    PosmoteConfig,
    generate_negatives,
    knn_indices,
    posmote,
    synthesize_positive,
)

BOUNDS = (np.array([0.0, -1.0]), np.array([1.0, 2.0]))


def brute_force_knn(points, i, k):
    d = np.sqrt(np.sum((points - points[i]) ** 2, axis=1))
    ranked = sorted((dist, j) for j, dist in enumerate(d) if j != i)
    return [j for _, j in ranked[: min(k, len(points) - 1)]]


class TestKnn:
    def test_collinear_points(self):
        pts = np.array([[0.0], [1.0], [3.0]])
        assert knn_indices(pts, 1, 1) == [0]

    def test_k_clamped_to_available(self):
        pts = np.random.default_rng(0).random((4, 3))
        assert len(knn_indices(pts, 0, 5)) == 3

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        pts = rng.random((20, 4))
        for i in range(20):
            assert knn_indices(pts, i, 6) == brute_force_knn(pts, i, 6)

    def test_singleton_has_no_neighbors(self):
        assert knn_indices(np.array([[0.5, 0.5]]), 0, 3) == []

    def test_distance_ties_take_lower_index(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        assert knn_indices(pts, 0, 2) == [1, 2]


class TestSynthesize:
    def test_limit_toward_base(self):
        base, nb = np.array([0.4, 0.6]), np.array([0.1, 0.2])
        out = synthesize_positive(base, nb, 1e-12)
        assert out == pytest.approx(base, abs=1e-11)

    def test_extrapolation_arithmetic(self):
        out = synthesize_positive(np.array([1.0, 1.0]), np.array([0.0, 0.0]), 0.5)
        assert out == pytest.approx([1.5, 1.5])

    def test_interpolation_direction(self):
        out = synthesize_positive(np.array([1.0, 1.0]), np.array([0.0, 0.0]), 0.5,
                                  direction="interpolate")
        assert out == pytest.approx([0.5, 0.5])

    def test_collinearity(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            base, nb = rng.random(3), rng.random(3)
            u = rng.random()
            out = synthesize_positive(base, nb, u)
            direction = base - nb
            coeff = (out - base) @ direction / (direction @ direction)
            assert coeff >= 0.0
            assert np.cross(out - base, direction) == pytest.approx(np.zeros(3), abs=1e-12)

    def test_clamped_into_bounds(self):
        out = synthesize_positive(np.array([0.9, 1.9]), np.array([0.1, 0.0]), 0.9,
                                  bounds=BOUNDS)
        assert np.all(out >= BOUNDS[0]) and np.all(out <= BOUNDS[1])


class TestNegatives:
    def test_zero_count(self):
        rng = np.random.default_rng(3)
        assert generate_negatives(0, BOUNDS, rng).shape == (0, 2)

    def test_count_contract(self):
        rng = np.random.default_rng(4)
        out = generate_negatives(600, BOUNDS, rng)
        assert out.shape == (600, 2)
        assert np.all(out >= BOUNDS[0]) and np.all(out <= BOUNDS[1])

    def test_mean_near_box_midpoint(self):
        rng = np.random.default_rng(5)
        out = generate_negatives(100_000, BOUNDS, rng)
        mid = 0.5 * (BOUNDS[0] + BOUNDS[1])
        span = BOUNDS[1] - BOUNDS[0]
        assert np.all(np.abs(out.mean(axis=0) - mid) < 0.01 * span)


class TestPosmote:
    def run(self, n, r=5, k=5, seed=6, direction="extrapolate"):
        rng = np.random.default_rng(seed)
        pos = BOUNDS[0] + np.random.default_rng(seed + 100).random((n, 2)) * (BOUNDS[1] - BOUNDS[0])
        cfg = PosmoteConfig(r=r, k=k, direction=direction)
        return pos, posmote(pos, cfg, BOUNDS, rng)

    def test_balanced_counts(self):
        _, out = self.run(n=100, r=5)
        assert out.positives.shape[0] == 600
        assert out.negatives.shape[0] == 600

    def test_rate_zero_returns_originals(self):
        pos, out = self.run(n=40, r=0)
        assert np.array_equal(out.positives, pos)
        assert out.negatives.shape[0] == 40
        assert out.provenance == []

    def test_all_in_bounds(self):
        for n, r in [(1, 5), (3, 3), (100, 5)]:
            _, out = self.run(n=n, r=r)
            for block in (out.positives, out.negatives):
                assert np.all(block >= BOUNDS[0]) and np.all(block <= BOUNDS[1])

    def test_synthetics_reconstructable_from_provenance(self):
        pos, out = self.run(n=30, r=4)
        assert len(out.provenance) == 120
        for row, (i, j, u) in zip(out.positives, out.provenance):
            assert j >= 0
            expect = np.clip(pos[i] + u * (pos[i] - pos[j]), BOUNDS[0], BOUNDS[1])
            assert row == pytest.approx(expect, abs=1e-12)

    def test_originals_appended_after_synthetics(self):
        pos, out = self.run(n=10, r=2)
        assert np.array_equal(out.positives[-10:], pos)

    def test_singleton_optimal_set_jitters(self):
        pos, out = self.run(n=1, r=5)
        assert out.positives.shape[0] == 6
        assert out.negatives.shape[0] == 6
        span = BOUNDS[1] - BOUNDS[0]
        for row in out.positives[:5]:
            assert np.all(np.abs(row - pos[0]) <= 0.01 * span + 1e-12)
        assert all(j == -1 for _, j, _ in out.provenance)

    def test_reproducible_under_seed(self):
        _, a = self.run(n=25, r=3, seed=9)
        _, b = self.run(n=25, r=3, seed=9)
        assert np.array_equal(a.positives, b.positives)
        assert np.array_equal(a.negatives, b.negatives)
        assert a.provenance == b.provenance

    def test_interpolate_direction_stays_in_hull(self):
        pos, out = self.run(n=20, r=3, direction="interpolate")
        lo, hi = pos.min(axis=0), pos.max(axis=0)
        synth = out.positives[:-20]
        assert np.all(synth >= lo - 1e-12) and np.all(synth <= hi + 1e-12)

    def test_bad_config_rejected(self):
        with pytest.raises(ConfigurationError):
            PosmoteConfig(r=-1)
        with pytest.raises(ConfigurationError):
            PosmoteConfig(k=0)
        with pytest.raises(ConfigurationError):
            PosmoteConfig(direction="sideways")

    def test_training_arrays_layout(self):
        _, out = self.run(n=12, r=1)
        X, y = out.training_arrays()
        assert X.shape == (48, 2)
        assert np.all(y[:24] == 1) and np.all(y[24:] == -1)
