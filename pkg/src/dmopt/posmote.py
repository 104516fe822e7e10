"""Balanced training sets from the previous Pareto-optimal set.

The optimal solutions found in the last environment are the positive
class; they are oversampled by interpolating each one against a randomly
chosen member of its k nearest neighbors, and matched one-for-one by
uniform random negatives drawn over the decision box.  The output is a
balanced two-class set of n*(r+1) samples per class.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ConfigurationError, ContractViolationError


@dataclass(frozen=True)
class PosmoteConfig:
    """Oversampling rate r, neighbor count k, and interpolation direction.

    ``direction`` selects which side of the base point new samples land
    on: "extrapolate" places them on the ray away from the neighbor
    (base + u * (base - neighbor)), "interpolate" on the segment toward
    it (base + u * (neighbor - base)).
    """

    r: int = 5
    k: int = 5
    direction: str = "extrapolate"

    def __post_init__(self):
        if self.r < 0:
            raise ConfigurationError("oversampling rate r must be >= 0")
        if self.k < 1:
            raise ConfigurationError("neighbor count k must be >= 1")
        if self.direction not in ("extrapolate", "interpolate"):
            raise ConfigurationError(f"unknown direction {self.direction!r}")


@dataclass
class LabeledSampleSet:
    """Balanced positives/negatives plus the provenance of each synthetic.

    ``provenance`` has one (base_index, neighbor_index, u) triple per
    synthetic positive, aligned with the leading rows of ``positives``;
    neighbor_index is -1 for jittered copies of a singleton input.
    """

    positives: np.ndarray
    negatives: np.ndarray
    provenance: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def size_per_class(self) -> int:
        return self.positives.shape[0]

    def training_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, y) with positives first, labels +1/-1."""
        X = np.vstack([self.positives, self.negatives])
        y = np.concatenate([
            np.ones(self.positives.shape[0]),
            -np.ones(self.negatives.shape[0]),
        ])
        return X, y


def knn_indices(points: np.ndarray, i: int, k: int) -> list[int]:
    """Indices of the k nearest distinct neighbors of points[i].

    Euclidean distance in decision space; effective k is min(k, n-1);
    distance ties resolve to the lower index.  A singleton set has no
    neighbors and yields an empty list.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if not 0 <= i < n:
        raise ContractViolationError(f"base index {i} out of range")
    if n == 1:
        return []
    d2 = np.sum((points - points[i]) ** 2, axis=1)
    order = np.argsort(d2, kind="stable")
    order = order[order != i]
    return [int(j) for j in order[: min(k, n - 1)]]


def synthesize_positive(base: np.ndarray, neighbor: np.ndarray, u: float,
                        bounds=None, direction: str = "extrapolate") -> np.ndarray:
    """One synthetic sample on the line through base and neighbor.

    u in (0, 1) scales the offset; the result is clamped componentwise
    into ``bounds`` when given.
    """
    base = np.asarray(base, dtype=float)
    neighbor = np.asarray(neighbor, dtype=float)
    if base.shape != neighbor.shape:
        raise ContractViolationError("base and neighbor dimension mismatch")
    if direction == "extrapolate":
        out = base + u * (base - neighbor)
    else:
        out = base + u * (neighbor - base)
    if bounds is not None:
        out = np.clip(out, bounds[0], bounds[1])
    return out


def generate_negatives(count: int, bounds, rng) -> np.ndarray:
    """``count`` vectors drawn uniformly and independently over the box."""
    lower, upper = np.asarray(bounds[0], dtype=float), np.asarray(bounds[1], dtype=float)
    if count < 0:
        raise ContractViolationError("negative sample count requested")
    return lower + rng.random((count, lower.shape[0])) * (upper - lower)


def posmote(pos_prev: np.ndarray, cfg: PosmoteConfig, bounds, rng) -> LabeledSampleSet:
    """Balanced sample set from the previous optimal set.

    Each of the n originals contributes r synthetics built against a
    uniformly chosen member of its nearest neighbors; the originals are
    then appended, and n*(r+1) uniform negatives balance the classes.
    A singleton optimal set has no neighbors, so its synthetics are
    jittered copies (uniform within 1% of each dimension's range).
    """
    pos_prev = np.atleast_2d(np.asarray(pos_prev, dtype=float))
    n = pos_prev.shape[0]
    if n < 1:
        raise ContractViolationError("previous optimal set must be non-empty")
    lower, upper = np.asarray(bounds[0], dtype=float), np.asarray(bounds[1], dtype=float)
    span = upper - lower
    synthetics = []
    provenance: list[tuple[int, int, float]] = []
    for i in range(n):
        neighbors = knn_indices(pos_prev, i, cfg.k)
        for _ in range(cfg.r):
            if neighbors:
                j = int(neighbors[rng.integers(0, len(neighbors))])
                u = float(rng.random())
                synthetics.append(
                    synthesize_positive(pos_prev[i], pos_prev[j], u,
                                        bounds=(lower, upper), direction=cfg.direction)
                )
                provenance.append((i, j, u))
            else:
                jitter = rng.uniform(-0.01, 0.01, size=span.shape) * span
                synthetics.append(np.clip(pos_prev[i] + jitter, lower, upper))
                provenance.append((i, -1, float("nan")))
    if synthetics:
        positives = np.vstack([np.vstack(synthetics), pos_prev])
    else:
        positives = pos_prev.copy()
    negatives = generate_negatives(n * (cfg.r + 1), (lower, upper), rng)
    return LabeledSampleSet(positives=positives, negatives=negatives, provenance=provenance)
