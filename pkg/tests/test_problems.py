import math

import numpy as np
import pytest

from dmopt.core import ContractViolationError, Individual, nondominated_filter
from dmopt.problems import (
    DF0,
    UnsupportedProblemError,
    available_problems,
    get_problem,
    implemented_problems,
)


def front_is_nondominated(objs):
    members = [Individual(decision=np.zeros(1), objectives=o, evaluated_at=0.0) for o in objs]
    return len(nondominated_filter(members)) == len(members)


class TestDF0:
    def setup_method(self):
        self.problem = DF0()

    def test_point_on_optimal_set(self):
        for t in [0.0, 0.3, 1.7]:
            x = self.problem.optimal_decision(0.25, t)
            f = self.problem.evaluate(x, t)
            assert f == pytest.approx([0.25, 0.5], abs=1e-12)

    def test_origin_at_t_zero(self):
        f = self.problem.evaluate(np.zeros(10), 0.0)
        assert f == pytest.approx([0.0, 1.0], abs=1e-12)

    def test_one_unit_off_the_set(self):
        # x1 = 1, one tail variable off by exactly 1 -> g = 2, f2 = 2 - sqrt(2)
        t = 0.4
        G = abs(math.sin(0.5 * math.pi * t))
        x = np.full(10, G)
        x[0] = 1.0
        x[1] = G + 1.0
        f = self.problem.evaluate(x, t)
        assert f[0] == pytest.approx(1.0)
        assert f[1] == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-12)  # ~0.5857864376269049

    def test_out_of_bounds_rejected(self):
        x = np.zeros(10)
        x[0] = 1.5
        with pytest.raises(ContractViolationError):
            self.problem.evaluate(x, 0.0)

    def test_optimal_set_maps_onto_analytic_front(self):
        rng = np.random.default_rng(3)
        for t in [0.0, 0.35, 2.2]:
            for f1 in rng.random(10):
                f = self.problem.evaluate(self.problem.optimal_decision(f1, t), t)
                assert abs(f[1] - (1.0 - math.sqrt(f[0]))) < 1e-12

    def test_front_shape_time_invariant(self):
        a = self.problem.true_pof_sample(0.1, 500)
        b = self.problem.true_pof_sample(1.9, 500)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_moving_set(self):
        x = self.problem.optimal_decision(0.5, 0.0)
        f_later = self.problem.evaluate(x, 1.0)
        assert f_later[1] > 1.0 - math.sqrt(0.5) + 1e-3


class TestTruePofSample:
    def test_three_point_sample(self):
        # Uniform in f1 with f2 = 1 - sqrt(f1).
        pts = DF0().true_pof_sample(0.7, 3)
        expected = np.array([[0.0, 1.0], [0.5, 1.0 - math.sqrt(0.5)], [1.0, 0.0]])
        assert pts == pytest.approx(expected, abs=1e-12)

    def test_two_points_are_extremes(self):
        pts = DF0().true_pof_sample(0.0, 2)
        assert pts == pytest.approx(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_exact_count_and_nondominated(self):
        pts = DF0().true_pof_sample(0.3, 137)
        assert pts.shape == (137, 2)
        assert front_is_nondominated(pts)


class TestSuiteProblems:
    def test_registry_names(self):
        names = available_problems()
        assert names[0] == "DF0"
        assert names == ["DF0"] + [f"DF{i}" for i in range(1, 15)]

    def test_unimplemented_fail_loudly(self):
        for name in ["DF4", "DF9", "DF14"]:
            with pytest.raises(UnsupportedProblemError):
                get_problem(name)

    def test_unknown_name(self):
        with pytest.raises(UnsupportedProblemError):
            get_problem("ZDT1")

    def test_dimensions(self):
        for name in implemented_problems():
            p = get_problem(name)
            assert p.dim == 10
            assert p.n_obj == 2

    def test_deterministic_evaluation(self):
        rng = np.random.default_rng(5)
        for name in implemented_problems():
            p = get_problem(name)
            x = p.lower + rng.random(p.dim) * (p.upper - p.lower)
            f1 = p.evaluate(x, 0.37)
            f2 = p.evaluate(x, 0.37)
            assert np.array_equal(f1, f2)

    def test_front_samples_nondominated(self):
        for name in implemented_problems():
            p = get_problem(name)
            for t in [0.0, 0.5, 1.3]:
                pts = p.true_pof_sample(t, 1000)
                assert pts.shape[0] == 1000
                assert front_is_nondominated(pts)

    def test_df1_pinned_points(self):
        p = get_problem("DF1")
        # t = 0: G = 0, H = 1.25; tail on the optimum makes g = 1.
        x = np.zeros(10)
        x[0] = 0.5
        f = p.evaluate(x, 0.0)
        assert f == pytest.approx([0.5, 1.0 - 0.5**1.25], abs=1e-12)
        # t = 1: G = 1, H = 2.
        x = np.ones(10)
        x[0] = 0.25
        f = p.evaluate(x, 1.0)
        assert f == pytest.approx([0.25, 1.0 - 0.0625], abs=1e-12)

    def test_df2_pinned_point(self):
        p = get_problem("DF2")
        # sin(pi*t/2) = 0.5 at t = 1/3: free index floor(9 * 0.5) = 4.
        t = 1.0 / 3.0
        x = np.full(10, 0.5)
        x[4] = 0.09
        f = p.evaluate(x, t)
        assert f == pytest.approx([0.09, 1.0 - 0.3], abs=1e-9)

    def test_df3_pinned_point(self):
        p = get_problem("DF3")
        # t = 0: G = 0, H = 1.5; tail x_i = x1^1.5 makes g = 1.
        x1 = 0.25
        x = np.full(10, x1**1.5)
        x[0] = x1
        f = p.evaluate(x, 0.0)
        assert f == pytest.approx([0.25, 0.875], abs=1e-12)

    def test_df5_pinned_point(self):
        p = get_problem("DF5")
        # t = 0: G = 0, w = 0, so the sine swing vanishes; off-set tail doubles g.
        x = np.zeros(10)
        x[0] = 0.5
        x[1] = 1.0
        f = p.evaluate(x, 0.0)
        assert f == pytest.approx([1.0, 1.0], abs=1e-12)
