"""Elitist genetic optimizer with nondominated sorting and crowding.

Standard generational loop: binary tournament on (rank, crowding),
simulated binary crossover, polynomial mutation, then elitist
environmental selection of the combined parent+offspring pool.  Works on
a frozen problem time t; the harness drives one call per environment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ContractViolationError,
    DynamicProblem,
    Individual,
    Population,
    nondominated_filter,
    nondominated_mask,
)


@dataclass(frozen=True)
class Nsga2Params:
    crossover_probability: float = 0.9
    sbx_eta: float = 20.0
    mutation_probability: float | None = None  # default 1/D, resolved at run time
    pm_eta: float = 20.0


def fast_nondominated_sort(pop: list[Individual]) -> list[list[Individual]]:
    """Partition into fronts: F1 nondominated, F2 nondominated of the rest, ..."""
    if not pop:
        return []
    objs = np.array([m.objectives for m in pop], dtype=float)
    ranks = _rank_fronts(objs)
    fronts: list[list[Individual]] = [[] for _ in range(ranks.max() + 1)]
    for member, rank in zip(pop, ranks):
        fronts[rank].append(member)
    return fronts


def _rank_fronts(objs: np.ndarray) -> np.ndarray:
    """Front index (0-based) per row by repeated nondominated peeling."""
    n = objs.shape[0]
    le = np.all(objs[:, None, :] <= objs[None, :, :], axis=2)
    lt = np.any(objs[:, None, :] < objs[None, :, :], axis=2)
    dominated_by = (le & lt).T  # dominated_by[i, j]: j dominates i
    counts = dominated_by.sum(axis=1)
    ranks = np.full(n, -1, dtype=int)
    rank = 0
    remaining = counts.copy()
    active = np.ones(n, dtype=bool)
    while active.any():
        front = active & (remaining == 0)
        if not front.any():
            raise ContractViolationError("cyclic domination; objectives must be finite")
        ranks[front] = rank
        active &= ~front
        remaining = remaining - dominated_by[:, front].sum(axis=1)
        rank += 1
    return ranks


def crowding_distance(front_objs: np.ndarray) -> np.ndarray:
    """Per-member crowding: boundary members infinite, interior members get
    the normalized side-sum of the surrounding cuboid."""
    front_objs = np.atleast_2d(np.asarray(front_objs, dtype=float))
    n, m = front_objs.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(m):
        order = np.argsort(front_objs[:, j], kind="stable")
        vals = front_objs[order, j]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span <= 0.0:
            continue
        dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def _rank_and_crowding(objs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ranks = _rank_fronts(objs)
    crowd = np.empty(len(objs))
    for r in range(ranks.max() + 1):
        idx = np.flatnonzero(ranks == r)
        crowd[idx] = crowding_distance(objs[idx])
    return ranks, crowd


def _tournament(ranks, crowd, rng, count):
    """Binary tournaments: lower rank wins, then larger crowding, then the
    first contender (deterministic)."""
    a = rng.integers(0, len(ranks), size=count)
    b = rng.integers(0, len(ranks), size=count)
    better_b = (ranks[b] < ranks[a]) | ((ranks[b] == ranks[a]) & (crowd[b] > crowd[a]))
    return np.where(better_b, b, a)


def _sbx_pair(p1, p2, lower, upper, eta, rng):
    u = rng.random(p1.shape)
    beta = np.where(u <= 0.5,
                    (2.0 * u) ** (1.0 / (eta + 1.0)),
                    (0.5 / (1.0 - u)) ** (1.0 / (eta + 1.0)))
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    return np.clip(c1, lower, upper), np.clip(c2, lower, upper)


def _polynomial_mutation(x, lower, upper, pm, eta, rng):
    out = x.copy()
    mask = rng.random(x.shape) < pm
    if not mask.any():
        return out
    u = rng.random(x.shape)
    delta = np.where(u < 0.5,
                     (2.0 * u) ** (1.0 / (eta + 1.0)) - 1.0,
                     1.0 - (2.0 * (1.0 - u)) ** (1.0 / (eta + 1.0)))
    out[mask] += delta[mask] * (upper - lower)[mask]
    return np.clip(out, lower, upper)


def _evaluate_members(problem, decisions, t):
    return [Individual(decision=x, objectives=problem.evaluate(x, t), evaluated_at=t)
            for x in decisions]


def _ensure_evaluated(problem, pop: Population, t: float) -> list[Individual]:
    members = []
    for m in pop:
        if m.is_evaluated and m.evaluated_at == t:
            members.append(m)
        else:
            members.append(Individual(decision=m.decision,
                                      objectives=problem.evaluate(m.decision, t),
                                      evaluated_at=t))
    return members


def nsga2_run(problem: DynamicProblem, t: float, initial: Population,
              generations: int, rng, params: Nsga2Params | None = None,
              on_generation=None) -> Population:
    """Optimize at frozen time t and return the final first front.

    ``on_generation(gen, members)`` is called with the surviving
    population after each generation (trace plotting hook).
    """
    params = params or Nsga2Params()
    lower, upper = problem.bounds
    pm = params.mutation_probability if params.mutation_probability is not None else 1.0 / problem.dim
    members = _ensure_evaluated(problem, initial, t)
    n_pop = len(members)
    if generations <= 0:
        return Population(members=nondominated_filter(members), capacity=initial.capacity or n_pop)
    for gen in range(generations):
        objs = np.array([m.objectives for m in members])
        ranks, crowd = _rank_and_crowding(objs)
        parents = _tournament(ranks, crowd, rng, n_pop)
        children: list[np.ndarray] = []
        for k in range(0, n_pop - 1, 2):
            p1 = members[parents[k]].decision
            p2 = members[parents[k + 1]].decision
            if rng.random() < params.crossover_probability:
                c1, c2 = _sbx_pair(p1, p2, lower, upper, params.sbx_eta, rng)
            else:
                c1, c2 = p1.copy(), p2.copy()
            children.append(_polynomial_mutation(c1, lower, upper, pm, params.pm_eta, rng))
            children.append(_polynomial_mutation(c2, lower, upper, pm, params.pm_eta, rng))
        if len(children) < n_pop:  # odd population: mutate one extra parent
            children.append(_polynomial_mutation(members[parents[-1]].decision,
                                                 lower, upper, pm, params.pm_eta, rng))
        offspring = _evaluate_members(problem, children[:n_pop], t)
        members = _environmental_selection(members + offspring, n_pop)
        if on_generation is not None:
            on_generation(gen, members)
    return Population(members=nondominated_filter(members), capacity=initial.capacity or n_pop)


def _environmental_selection(pool: list[Individual], n_pop: int) -> list[Individual]:
    """Elitist truncation: fill whole fronts, split the last by crowding."""
    objs = np.array([m.objectives for m in pool])
    ranks = _rank_fronts(objs)
    selected: list[int] = []
    for r in range(ranks.max() + 1):
        idx = np.flatnonzero(ranks == r)
        if len(selected) + len(idx) <= n_pop:
            selected.extend(idx)
        else:
            crowd = crowding_distance(objs[idx])
            order = np.argsort(-crowd, kind="stable")
            selected.extend(idx[order[: n_pop - len(selected)]])
            break
    return [pool[i] for i in selected]


def first_front_decisions(pop: Population, cap: int) -> np.ndarray:
    """Decision vectors of the nondominated members, truncated to cap."""
    objs = pop.objectives()
    mask = nondominated_mask(objs)
    dec = pop.decisions()[mask]
    return dec[:cap]
