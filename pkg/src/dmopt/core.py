"""Domain types shared by the whole framework.

Decision vectors and objective vectors are plain 1-D float arrays; the
classes below only add the bookkeeping that the optimizers, the sampler
and the experiment harness need: Pareto dominance, populations, the
discrete-time context of a changing environment, and the problem
interface.

Everything here follows the minimization convention.  Problems posed as
maximization must negate their objectives at the problem layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ContractViolationError(ValueError):
    """An argument broke a documented precondition or invariant."""


class ConfigurationError(ValueError):
    """A configuration value is invalid or refers to an unknown component."""


def as_vector(values, dim: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float64 array, optionally checking its length."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ContractViolationError(f"expected a 1-D vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ContractViolationError(f"expected a vector of length {dim}, got {x.shape[0]}")
    return x


def dominates(a, b) -> bool:
    """True iff objective vector ``a`` Pareto-dominates ``b`` (minimization).

    ``a`` dominates ``b`` when a_i <= b_i in every component and a_i < b_i
    in at least one.  Comparisons are exact; equal vectors do not dominate
    each other.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractViolationError(f"objective dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def _domination_matrix(objs: np.ndarray) -> np.ndarray:
    """dom[i, j] is True when row i dominates row j."""
    le = np.all(objs[:, None, :] <= objs[None, :, :], axis=2)
    lt = np.any(objs[:, None, :] < objs[None, :, :], axis=2)
    return le & lt


def nondominated_mask(objs: np.ndarray) -> np.ndarray:
    """Boolean mask of the rows of ``objs`` not dominated by any other row."""
    objs = np.asarray(objs, dtype=float)
    if objs.size == 0:
        return np.zeros(0, dtype=bool)
    return ~_domination_matrix(objs).any(axis=0)


@dataclass(frozen=True)
class Individual:
    """A decision vector together with its cached objective values.

    Objectives are cached, never recomputed implicitly: after an
    environment change the caller must re-evaluate explicitly.  A member
    with ``objectives is None`` has not been evaluated yet.
    """

    decision: np.ndarray
    objectives: np.ndarray | None = None
    evaluated_at: float | None = None

    @property
    def is_evaluated(self) -> bool:
        return self.objectives is not None


@dataclass
class Population:
    """A list of individuals with a nominal capacity."""

    members: list[Individual] = field(default_factory=list)
    capacity: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def decisions(self) -> np.ndarray:
        return np.array([m.decision for m in self.members], dtype=float)

    def objectives(self) -> np.ndarray:
        if any(not m.is_evaluated for m in self.members):
            raise ContractViolationError("population contains unevaluated members")
        return np.array([m.objectives for m in self.members], dtype=float)


def nondominated_filter(pop: Sequence[Individual]) -> list[Individual]:
    """Members of ``pop`` not dominated by any other member, in input order.

    Duplicated objective vectors do not dominate one another, so
    duplicates are all retained.
    """
    members = list(pop)
    if not members:
        return []
    objs = np.array([m.objectives for m in members], dtype=float)
    mask = nondominated_mask(objs)
    return [m for m, keep in zip(members, mask) if keep]


@dataclass
class TimeContext:
    """Severity / frequency bookkeeping for a changing environment.

    ``tau`` is the raw iteration (generation) counter; the discrete time
    seen by the problem is t = floor(tau / tau_t) / n_t, recomputed on
    demand and never stored.
    """

    n_t: int
    tau_t: int
    tau: int = 0
    num_changes: int = 30

    def __post_init__(self):
        if self.n_t < 1 or self.tau_t < 1:
            raise ConfigurationError("n_t and tau_t must be positive integers")
        if self.tau < 0:
            raise ConfigurationError("tau must be non-negative")

    @property
    def time(self) -> float:
        return current_time(self)

    def advance(self, generations: int = 1) -> None:
        self.tau += generations


def current_time(ctx: TimeContext) -> float:
    """Discrete time t = floor(tau / tau_t) / n_t."""
    return (ctx.tau // ctx.tau_t) / ctx.n_t


class DynamicProblem:
    """Interface of a box-constrained dynamic multiobjective problem.

    Subclasses provide deterministic ``evaluate(x, t)`` and, when the
    front is known analytically, ``true_pof_sample(t, count)``.  Problems
    are stateless and reentrant.
    """

    name: str = "unnamed"
    dim: int = 0
    n_obj: int = 0
    lower: np.ndarray
    upper: np.ndarray

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower, self.upper

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def true_pof_sample(self, t: float, count: int) -> np.ndarray:
        raise NotImplementedError(f"{self.name} has no analytic front")

    def check_bounds(self, x: np.ndarray) -> np.ndarray:
        x = as_vector(x, self.dim)
        if np.any(x < self.lower) or np.any(x > self.upper):
            raise ContractViolationError(f"{self.name}: decision vector outside box bounds")
        return x
