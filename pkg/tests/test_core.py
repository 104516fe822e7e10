import numpy as np
import pytest

from dmopt.core import (
    ContractViolationError,
    Individual,
    TimeContext,
    current_time,
    dominates,
    nondominated_filter,
)


def brute_force_nondominated(members):
    """O(n^2) oracle: keep members no other member dominates."""
    kept = []
    for i, a in enumerate(members):
        dominated = False
        for j, b in enumerate(members):
            if i != j and dominates(b.objectives, a.objectives):
                dominated = True
                break
        if not dominated:
            kept.append(a)
    return kept


def make_pop(objs):
    return [Individual(decision=np.zeros(1), objectives=np.asarray(o, float), evaluated_at=0.0) for o in objs]


class TestDominates:
    def test_strict_improvement(self):
        assert dominates((1, 2), (2, 3))

    def test_equal_vectors_do_not_dominate(self):
        assert not dominates((1, 2), (1, 2))

    def test_incomparable_pair(self):
        assert not dominates((1, 3), (2, 2))
        assert not dominates((2, 2), (1, 3))

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolationError):
            dominates((1, 2), (1, 2, 3))

    def test_strict_partial_order_properties(self):
        rng = np.random.default_rng(7)
        vecs = rng.random((40, 3))
        for a in vecs[:15]:
            assert not dominates(a, a)  # irreflexive
        for a in vecs:
            for b in vecs:
                if dominates(a, b):
                    assert not dominates(b, a)  # asymmetric
        # transitive over random triples
        for _ in range(400):
            i, j, k = rng.integers(0, len(vecs), size=3)
            if dominates(vecs[i], vecs[j]) and dominates(vecs[j], vecs[k]):
                assert dominates(vecs[i], vecs[k])


class TestNondominatedFilter:
    def test_simple_case(self):
        pop = make_pop([(1, 2), (2, 1), (2, 2)])
        kept = nondominated_filter(pop)
        assert [tuple(m.objectives) for m in kept] == [(1, 2), (2, 1)]

    def test_singleton(self):
        pop = make_pop([(3, 4)])
        assert nondominated_filter(pop) == pop

    def test_empty(self):
        assert nondominated_filter([]) == []

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(11)
        pop = make_pop(rng.random((50, 2)))
        kept = nondominated_filter(pop)
        assert kept == brute_force_nondominated(pop)

    def test_output_pairwise_incomparable(self):
        rng = np.random.default_rng(13)
        pop = make_pop(rng.integers(0, 6, size=(60, 2)))
        kept = nondominated_filter(pop)
        for a in kept:
            for b in kept:
                if a is not b:
                    assert not dominates(a.objectives, b.objectives)

    def test_duplicates_are_retained(self):
        pop = make_pop([(1, 1), (1, 1), (2, 2)])
        kept = nondominated_filter(pop)
        assert len(kept) == 2
        assert all(tuple(m.objectives) == (1, 1) for m in kept)

    def test_order_stable(self):
        pop = make_pop([(2, 1), (1, 2), (0, 3)])
        kept = nondominated_filter(pop)
        assert kept == pop


class TestCurrentTime:
    def test_at_start(self):
        assert current_time(TimeContext(n_t=10, tau_t=10, tau=0)) == 0.0

    def test_mid_window(self):
        # floor(25 / 10) / 10
        assert current_time(TimeContext(n_t=10, tau_t=10, tau=25)) == pytest.approx(0.2)

    def test_other_severity(self):
        # floor(30 / 10) / 5
        assert current_time(TimeContext(n_t=5, tau_t=10, tau=30)) == pytest.approx(0.6)

    def test_piecewise_constant_with_jumps_at_multiples(self):
        ctx = TimeContext(n_t=4, tau_t=7)
        previous = current_time(ctx)
        for tau in range(1, 100):
            ctx.tau = tau
            now = current_time(ctx)
            if tau % 7 == 0:
                assert now == pytest.approx(previous + 1 / 4)
            else:
                assert now == previous
            previous = now
