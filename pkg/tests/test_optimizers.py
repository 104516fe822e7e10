import numpy as np
import pytest

from dmopt.core import Individual, Population, dominates, nondominated_filter
from dmopt.metrics import igd
from dmopt.mopso import mopso_run
from dmopt.nsga2 import crowding_distance, fast_nondominated_sort, nsga2_run
from dmopt.optimizers import available_optimizers, get_optimizer
from dmopt.problems import DF0


def make_members(objs):
    return [Individual(decision=np.zeros(2), objectives=np.asarray(o, float), evaluated_at=0.0)
            for o in objs]


def random_population(problem, n, rng, t=0.0, evaluated=True):
    decisions = problem.lower + rng.random((n, problem.dim)) * (problem.upper - problem.lower)
    members = []
    for x in decisions:
        if evaluated:
            members.append(Individual(decision=x, objectives=problem.evaluate(x, t), evaluated_at=t))
        else:
            members.append(Individual(decision=x))
    return Population(members=members, capacity=n)


def peeling_oracle(members):
    """Repeatedly strip the nondominated set; independent front builder."""
    fronts = []
    rest = list(members)
    while rest:
        front = nondominated_filter(rest)
        fronts.append(front)
        front_ids = {id(m) for m in front}
        rest = [m for m in rest if id(m) not in front_ids]
    return fronts


class TestSorting:
    def test_all_nondominated_single_front(self):
        pop = make_members([(0, 3), (1, 2), (2, 1), (3, 0)])
        fronts = fast_nondominated_sort(pop)
        assert len(fronts) == 1 and len(fronts[0]) == 4

    def test_total_order_gives_singleton_fronts(self):
        pop = make_members([(i, i) for i in range(5)])
        fronts = fast_nondominated_sort(pop)
        assert [len(f) for f in fronts] == [1] * 5

    def test_matches_peeling_oracle(self):
        rng = np.random.default_rng(1)
        pop = make_members(rng.integers(0, 8, size=(60, 2)))
        fronts = fast_nondominated_sort(pop)
        oracle = peeling_oracle(pop)
        assert len(fronts) == len(oracle)
        for got, want in zip(fronts, oracle):
            assert {id(m) for m in got} == {id(m) for m in want}


class TestCrowding:
    def test_hand_case_midpoint(self):
        objs = np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
        dist = crowding_distance(objs)
        assert dist[1] == pytest.approx(2.0)

    def test_boundary_infinite(self):
        rng = np.random.default_rng(2)
        objs = rng.random((12, 2))
        dist = crowding_distance(objs)
        assert dist[np.argmin(objs[:, 0])] == np.inf
        assert dist[np.argmax(objs[:, 0])] == np.inf

    def test_small_front_all_infinite(self):
        assert np.all(np.isinf(crowding_distance(np.array([[0.0, 1.0], [1.0, 0.0]]))))

    def test_interior_duplicates_zero(self):
        objs = np.array([[0.0, 1.0], [0.5, 0.5], [0.5, 0.5], [0.5, 0.5], [1.0, 0.0]])
        dist = crowding_distance(objs)
        assert np.sort(dist[1:4])[0] == pytest.approx(0.0)


class TestNsga2:
    def test_zero_generations_returns_filtered_initial(self):
        problem = DF0()
        rng = np.random.default_rng(3)
        pop = random_population(problem, 30, rng)
        out = nsga2_run(problem, 0.0, pop, 0, rng)
        want = nondominated_filter(pop.members)
        assert [id(m) for m in out.members] == [id(m) for m in want]

    def test_output_nondominated_in_bounds_and_capped(self):
        problem = DF0()
        rng = np.random.default_rng(4)
        pop = random_population(problem, 40, rng, evaluated=False)
        out = nsga2_run(problem, 0.3, pop, 15, rng)
        assert 0 < len(out) <= 40
        objs = out.objectives()
        assert len(nondominated_filter(out.members)) == len(out)
        for m in out:
            assert np.all(m.decision >= problem.lower) and np.all(m.decision <= problem.upper)
            assert m.evaluated_at == 0.3
        assert objs.shape[1] == 2

    def test_reproducible_under_seed(self):
        problem = DF0()
        outs = []
        for _ in range(2):
            rng = np.random.default_rng(5)
            pop = random_population(problem, 30, np.random.default_rng(6))
            outs.append(nsga2_run(problem, 0.0, pop, 10, rng).decisions())
        assert np.array_equal(outs[0], outs[1])

    def test_elitism_best_per_objective_never_worsens(self):
        problem = DF0()
        rng = np.random.default_rng(7)
        pop = random_population(problem, 40, rng)
        best = pop.objectives().min(axis=0)
        for _ in range(8):
            pop = nsga2_run(problem, 0.0, pop, 1, rng)
            now = pop.objectives().min(axis=0)
            assert np.all(now <= best + 1e-12)
            best = now

    def test_df0_convergence(self):
        problem = DF0()
        rng = np.random.default_rng(8)
        pop = random_population(problem, 100, rng, t=0.5)
        out = nsga2_run(problem, 0.5, pop, 100, rng)
        value = igd(problem.true_pof_sample(0.5, 1000), out.objectives())
        assert value < 0.05


class TestMopso:
    def test_zero_generations_returns_filtered_initial(self):
        problem = DF0()
        rng = np.random.default_rng(9)
        pop = random_population(problem, 25, rng)
        out = mopso_run(problem, 0.0, pop, 0, rng)
        want = nondominated_filter(pop.members)
        assert [id(m) for m in out.members] == [id(m) for m in want]

    def test_positions_stay_feasible_and_archive_nondominated(self):
        problem = DF0()
        rng = np.random.default_rng(10)
        pop = random_population(problem, 30, rng, evaluated=False)
        out = mopso_run(problem, 0.2, pop, 20, rng)
        assert 0 < len(out) <= 30
        for m in out:
            assert np.all(m.decision >= problem.lower) and np.all(m.decision <= problem.upper)
        assert len(nondominated_filter(out.members)) == len(out)

    def test_archive_capacity_respected(self):
        problem = DF0()
        rng = np.random.default_rng(11)
        pop = random_population(problem, 20, rng)
        out = mopso_run(problem, 0.0, pop, 30, rng)
        assert len(out) <= 20

    def test_reproducible_under_seed(self):
        problem = DF0()
        outs = []
        for _ in range(2):
            rng = np.random.default_rng(12)
            pop = random_population(problem, 25, np.random.default_rng(13))
            outs.append(mopso_run(problem, 0.1, pop, 12, rng).decisions())
        assert np.array_equal(outs[0], outs[1])

    def test_df0_convergence(self):
        problem = DF0()
        rng = np.random.default_rng(14)
        pop = random_population(problem, 100, rng, t=0.5)
        out = mopso_run(problem, 0.5, pop, 100, rng)
        value = igd(problem.true_pof_sample(0.5, 1000), out.objectives())
        assert value < 0.1


class TestRegistry:
    def test_names(self):
        assert available_optimizers() == ["mopso", "nsga2"]

    def test_unknown_rejected(self):
        from dmopt.core import ConfigurationError

        with pytest.raises(ConfigurationError):
            get_optimizer("rmmeda")

    def test_instances_run(self):
        problem = DF0()
        for name in available_optimizers():
            opt = get_optimizer(name)
            rng = np.random.default_rng(15)
            pop = random_population(problem, 20, rng)
            out = opt.run(problem, 0.0, pop, 3, rng)
            assert len(out) >= 1
