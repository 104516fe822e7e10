"""Dynamic benchmark problems.

DF0 is a fully self-contained reference problem used throughout the test
suite: a moving Pareto set (x_i = G(t) for i >= 2) with a time-invariant
front f2 = 1 - sqrt(f1).  A subset of the CEC 2018 dynamic suite (DF1,
DF2, DF3, DF5) is bundled; the remaining names are registered but raise
with a clear message until an implementation is supplied through
``register_problem`` — they never silently fall back to DF0.

All problems here use D = 10 decision variables, are stateless, and
evaluate deterministically for a given (x, t).
"""

from __future__ import annotations

import math

import numpy as np

from .core import ContractViolationError, DynamicProblem


class UnsupportedProblemError(NotImplementedError):
    """The requested benchmark has no bundled implementation."""


def _moving_peak(t: float) -> float:
    """G(t) = |sin(pi*t/2)|, the drifting target shared by several problems."""
    return abs(math.sin(0.5 * math.pi * t))


class DF0(DynamicProblem):
    """Self-contained reference problem with an analytically known front.

    f1 = x1,  g = 1 + sum_{i>=2} (x_i - G(t))^2,  f2 = g * (1 - sqrt(f1/g))
    with G(t) = |sin(pi*t/2)|.  The Pareto set at time t is x_i = G(t) for
    i >= 2 with x1 free in [0, 1]; the front is f2 = 1 - sqrt(f1) at every
    t (a moving set under a fixed front).
    """

    name = "DF0"
    dim = 10
    n_obj = 2

    def __init__(self):
        self.lower = np.array([0.0] + [-1.0] * (self.dim - 1))
        self.upper = np.array([1.0] + [2.0] * (self.dim - 1))

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        x = self.check_bounds(x)
        g = 1.0 + np.sum((x[1:] - _moving_peak(t)) ** 2)
        f1 = x[0]
        f2 = g * (1.0 - math.sqrt(f1 / g))
        return np.array([f1, f2])

    def true_pof_sample(self, t: float, count: int) -> np.ndarray:
        # Uniform in f1; the front itself does not depend on t.
        f1 = np.linspace(0.0, 1.0, count)
        return np.column_stack([f1, 1.0 - np.sqrt(f1)])

    def optimal_decision(self, f1: float, t: float) -> np.ndarray:
        """A Pareto-optimal decision vector with first objective f1."""
        x = np.full(self.dim, _moving_peak(t))
        x[0] = f1
        return x


class DF1(DynamicProblem):
    """CEC 2018 DF1: moving set, front f2 = 1 - f1^H(t) with drifting H."""

    name = "DF1"
    dim = 10
    n_obj = 2

    def __init__(self):
        self.lower = np.zeros(self.dim)
        self.upper = np.ones(self.dim)

    @staticmethod
    def _shape(t: float) -> float:
        return 0.75 * math.sin(0.5 * math.pi * t) + 1.25

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        x = self.check_bounds(x)
        G = _moving_peak(t)
        H = self._shape(t)
        g = 1.0 + np.sum((x[1:] - G) ** 2)
        f1 = x[0]
        f2 = g * (1.0 - (f1 / g) ** H)
        return np.array([f1, f2])

    def true_pof_sample(self, t: float, count: int) -> np.ndarray:
        f1 = np.linspace(0.0, 1.0, count)
        return np.column_stack([f1, 1.0 - f1 ** self._shape(t)])


class DF2(DynamicProblem):
    """CEC 2018 DF2: the free variable index drifts; fixed front 1 - sqrt(f1)."""

    name = "DF2"
    dim = 10
    n_obj = 2

    def __init__(self):
        self.lower = np.zeros(self.dim)
        self.upper = np.ones(self.dim)

    def _free_index(self, t: float) -> int:
        return int(math.floor((self.dim - 1) * _moving_peak(t)))

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        x = self.check_bounds(x)
        G = _moving_peak(t)
        r = self._free_index(t)
        rest = np.delete(x, r)
        g = 1.0 + np.sum((rest - G) ** 2)
        f1 = x[r]
        f2 = g * (1.0 - math.sqrt(f1 / g))
        return np.array([f1, f2])

    def true_pof_sample(self, t: float, count: int) -> np.ndarray:
        f1 = np.linspace(0.0, 1.0, count)
        return np.column_stack([f1, 1.0 - np.sqrt(f1)])


class DF3(DynamicProblem):
    """CEC 2018 DF3: set drifts along a curve coupled to x1."""

    name = "DF3"
    dim = 10
    n_obj = 2

    def __init__(self):
        self.lower = np.array([0.0] + [-1.0] * (self.dim - 1))
        self.upper = np.array([1.0] + [2.0] * (self.dim - 1))

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        x = self.check_bounds(x)
        G = math.sin(0.5 * math.pi * t)
        H = G + 1.5
        g = 1.0 + np.sum((x[1:] - G - x[0] ** H) ** 2)
        f1 = x[0]
        f2 = g * (1.0 - (f1 / g) ** H)
        return np.array([f1, f2])

    def true_pof_sample(self, t: float, count: int) -> np.ndarray:
        H = math.sin(0.5 * math.pi * t) + 1.5
        f1 = np.linspace(0.0, 1.0, count)
        return np.column_stack([f1, 1.0 - f1 ** H])


class DF5(DynamicProblem):
    """CEC 2018 DF5: front wobbles with w(t) = floor(10 sin(pi*t/2))."""

    name = "DF5"
    dim = 10
    n_obj = 2

    def __init__(self):
        self.lower = np.array([0.0] + [-1.0] * (self.dim - 1))
        self.upper = np.array([1.0] + [1.0] * (self.dim - 1))

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        x = self.check_bounds(x)
        G = math.sin(0.5 * math.pi * t)
        w = math.floor(10.0 * G)
        g = 1.0 + np.sum((x[1:] - G) ** 2)
        swing = 0.02 * math.sin(w * math.pi * x[0])
        f1 = g * (x[0] + swing)
        f2 = g * (1.0 - x[0] + swing)
        return np.array([f1, f2])

    def true_pof_sample(self, t: float, count: int) -> np.ndarray:
        G = math.sin(0.5 * math.pi * t)
        w = math.floor(10.0 * G)
        x1 = np.linspace(0.0, 1.0, count)
        swing = 0.02 * np.sin(w * math.pi * x1)
        return np.column_stack([x1 + swing, 1.0 - x1 + swing])


class _MissingProblem:
    """Placeholder factory that fails loudly when instantiated."""

    def __init__(self, name: str):
        self.name = name

    def __call__(self):
        raise UnsupportedProblemError(
            f"{self.name} has no bundled implementation; transcribe it from the CEC 2018 "
            f"dynamic benchmark definitions and install it with register_problem()"
        )


_REGISTRY: dict[str, object] = {}


def register_problem(name: str, factory) -> None:
    """Register (or replace) a problem factory under ``name``."""
    _REGISTRY[name] = factory


def available_problems() -> list[str]:
    """All registered names, implemented or not."""
    return sorted(_REGISTRY, key=lambda n: (len(n), n))


def implemented_problems() -> list[str]:
    return [n for n in available_problems() if not isinstance(_REGISTRY[n], _MissingProblem)]


def get_problem(name: str) -> DynamicProblem:
    """Instantiate a registered problem; unknown or stub names fail loudly."""
    if name not in _REGISTRY:
        raise UnsupportedProblemError(
            f"unknown problem {name!r}; registered names: {', '.join(available_problems())}"
        )
    return _REGISTRY[name]()


register_problem("DF0", DF0)
register_problem("DF1", DF1)
register_problem("DF2", DF2)
register_problem("DF3", DF3)
register_problem("DF5", DF5)
for _n in ["DF4"] + [f"DF{i}" for i in range(6, 15)]:
    register_problem(_n, _MissingProblem(_n))


def clamp_to_bounds(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Componentwise clamp into the box [lower, upper]."""
    return np.clip(x, lower, upper)


def check_within_bounds(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> None:
    if np.any(x < lower) or np.any(x > upper):
        raise ContractViolationError("vector outside box bounds")
