"""Multiobjective particle swarm optimizer with an external grid archive.

Particles fly toward a personal best and an archive leader picked by
roulette over inverse grid density; the nondominated archive is
truncated from its densest cells.  A turbulence operator mutates a
decaying fraction of the swarm early in the run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DynamicProblem,
    Individual,
    Population,
    dominates,
    nondominated_filter,
    nondominated_mask,
)


@dataclass(frozen=True)
class MopsoParams:
    inertia: float = 0.4
    cognitive: float = 1.0
    social: float = 1.0
    grid_divisions: int = 30
    mutation_rate: float = 0.5  # fraction of the run with turbulence, decaying
    archive_capacity: int | None = None  # default: population size


def _grid_cells(objs: np.ndarray, divisions: int) -> np.ndarray:
    """Integer cell id per point of an adaptive grid over the archive."""
    lo = objs.min(axis=0)
    hi = objs.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    coords = np.minimum(((objs - lo) / span * divisions).astype(int), divisions - 1)
    cells = coords[:, 0].copy()
    for j in range(1, objs.shape[1]):
        cells = cells * divisions + coords[:, j]
    return cells


class _Archive:
    """Bounded nondominated store with density-based leader selection."""

    def __init__(self, capacity: int, divisions: int):
        self.capacity = capacity
        self.divisions = divisions
        self.x = np.empty((0, 0))
        self.f = np.empty((0, 0))

    def update(self, xs: np.ndarray, fs: np.ndarray, rng) -> None:
        if self.x.size:
            xs = np.vstack([self.x, xs])
            fs = np.vstack([self.f, fs])
        mask = nondominated_mask(fs)
        self.x, self.f = xs[mask], fs[mask]
        while self.x.shape[0] > self.capacity:
            cells = _grid_cells(self.f, self.divisions)
            ids, counts = np.unique(cells, return_counts=True)
            densest = ids[np.argmax(counts)]
            members = np.flatnonzero(cells == densest)
            drop = members[rng.integers(0, len(members))]
            self.x = np.delete(self.x, drop, axis=0)
            self.f = np.delete(self.f, drop, axis=0)

    def select_leaders(self, count: int, rng) -> np.ndarray:
        """One leader per particle, favoring sparse grid cells."""
        cells = _grid_cells(self.f, self.divisions)
        ids, inverse, counts = np.unique(cells, return_inverse=True, return_counts=True)
        weights = 10.0 / counts
        probs = weights / weights.sum()
        chosen_cells = rng.choice(len(ids), size=count, p=probs)
        leaders = np.empty(count, dtype=int)
        for k, cell in enumerate(chosen_cells):
            members = np.flatnonzero(inverse == cell)
            leaders[k] = members[rng.integers(0, len(members))]
        return self.x[leaders]


def mopso_run(problem: DynamicProblem, t: float, initial: Population,
              generations: int, rng, params: MopsoParams | None = None,
              on_generation=None) -> Population:
    """Optimize at frozen time t and return the archive contents.

    ``on_generation(gen, members)`` is called with the archive after each
    generation (trace plotting hook).
    """
    params = params or MopsoParams()
    lower, upper = problem.bounds
    span = upper - lower
    members = []
    for m in initial:
        if m.is_evaluated and m.evaluated_at == t:
            members.append(m)
        else:
            members.append(Individual(decision=m.decision,
                                      objectives=problem.evaluate(m.decision, t),
                                      evaluated_at=t))
    n = len(members)
    capacity = params.archive_capacity or n
    if generations <= 0:
        return Population(members=nondominated_filter(members), capacity=capacity)

    x = np.array([m.decision for m in members])
    f = np.array([m.objectives for m in members])
    v = np.zeros_like(x)
    pbest_x, pbest_f = x.copy(), f.copy()
    archive = _Archive(capacity, params.grid_divisions)
    archive.update(x, f, rng)

    for gen in range(generations):
        leaders = archive.select_leaders(n, rng)
        r1 = rng.random(x.shape)
        r2 = rng.random(x.shape)
        v = (params.inertia * v
             + params.cognitive * r1 * (pbest_x - x)
             + params.social * r2 * (leaders - x))
        x = x + v
        # Bounce off the box: clamp position, reverse velocity there.
        low_hit = x < lower
        high_hit = x > upper
        x = np.clip(x, lower, upper)
        v[low_hit | high_hit] *= -1.0

        # Turbulence on a decaying fraction of the swarm.
        if params.mutation_rate > 0:
            decay = 1.0 - gen / max(generations * params.mutation_rate, 1e-9)
            if decay > 0:
                strength = decay**1.5
                mutate = np.flatnonzero(rng.random(n) < strength)
                if mutate.size:
                    dims = rng.integers(0, x.shape[1], size=mutate.size)
                    width = strength * span[dims]
                    x[mutate, dims] = np.clip(
                        x[mutate, dims] + rng.uniform(-0.5, 0.5, mutate.size) * width,
                        lower[dims], upper[dims])

        f = np.array([problem.evaluate(xi, t) for xi in x])
        archive.update(x, f, rng)
        # Personal bests: replace when dominated, coin flip when incomparable.
        for i in range(n):
            if dominates(f[i], pbest_f[i]):
                pbest_x[i], pbest_f[i] = x[i], f[i]
            elif not dominates(pbest_f[i], f[i]) and rng.random() < 0.5:
                pbest_x[i], pbest_f[i] = x[i], f[i]
        if on_generation is not None:
            on_generation(gen, [Individual(decision=xi, objectives=fi, evaluated_at=t)
                                for xi, fi in zip(archive.x, archive.f)])

    members = [Individual(decision=xi, objectives=fi, evaluated_at=t)
               for xi, fi in zip(archive.x, archive.f)]
    return Population(members=members, capacity=capacity)
