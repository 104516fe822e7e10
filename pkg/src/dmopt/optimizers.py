"""Registry of static multiobjective optimizers pluggable into the harness.

An optimizer takes (problem, t, initial population, generation budget,
rng) and returns a mutually nondominated population evaluated at t.  Any
population-based method fits; the two bundled ones are the genetic
optimizer and the particle swarm.
"""

from __future__ import annotations

from .core import ConfigurationError, DynamicProblem, Population
from .mopso import MopsoParams, mopso_run
from .nsga2 import Nsga2Params, nsga2_run


class StaticOptimizer:
    """Callable wrapper so optimizers carry a name and fixed parameters."""

    name: str

    def run(self, problem: DynamicProblem, t: float, initial: Population,
            generations: int, rng, on_generation=None) -> Population:
        raise NotImplementedError


class Nsga2Optimizer(StaticOptimizer):
    name = "nsga2"

    def __init__(self, params: Nsga2Params | None = None):
        self.params = params or Nsga2Params()

    def run(self, problem, t, initial, generations, rng, on_generation=None):
        return nsga2_run(problem, t, initial, generations, rng, self.params,
                         on_generation=on_generation)


class MopsoOptimizer(StaticOptimizer):
    name = "mopso"

    def __init__(self, params: MopsoParams | None = None):
        self.params = params or MopsoParams()

    def run(self, problem, t, initial, generations, rng, on_generation=None):
        return mopso_run(problem, t, initial, generations, rng, self.params,
                         on_generation=on_generation)


_REGISTRY = {
    "nsga2": Nsga2Optimizer,
    "mopso": MopsoOptimizer,
}


def available_optimizers() -> list[str]:
    return sorted(_REGISTRY)


def get_optimizer(name: str) -> StaticOptimizer:
    if name not in _REGISTRY:
        raise ConfigurationError(
            f"unknown optimizer {name!r}; available: {', '.join(available_optimizers())}"
        )
    return _REGISTRY[name]()


def register_optimizer(name: str, factory) -> None:
    _REGISTRY[name] = factory
