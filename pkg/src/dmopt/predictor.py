"""Classifier-filtered initial populations.

After an environment change, the balanced sample set built from the last
Pareto-optimal set is pushed into the incremental SVM one sample at a
time (the state is updated, never rebuilt), and the refreshed classifier
then acts as a rejection filter: uniform random decision vectors are
kept only when classified positive, until the population is full.

No objective evaluations happen here; members are returned unevaluated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, Individual, Population
from .isvm import IncrementalSvm, UntrainedModelError
from .posmote import LabeledSampleSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PredictorConfig:
    """Attempt cap and training-insertion order.

    The filter loop stops after max_attempts_factor * population_size
    candidates and fills the remainder with plain uniform draws, which
    bounds the runtime when the classifier's positive region has tiny
    volume.  "shuffled" interleaves both classes during training so the
    classifier never sees a long one-class prefix; "positives-first"
    inserts all positives before any negative.
    """

    max_attempts_factor: int = 100
    insert_order: str = "shuffled"

    def __post_init__(self):
        if self.max_attempts_factor < 1:
            raise ConfigurationError("max_attempts_factor must be >= 1")
        if self.insert_order not in ("shuffled", "positives-first"):
            raise ConfigurationError(f"unknown insert order {self.insert_order!r}")


def train_online(svm: IncrementalSvm, train: LabeledSampleSet, rng,
                 insert_order: str = "shuffled") -> IncrementalSvm:
    """Insert every sample of the balanced set into the classifier."""
    X, y = train.training_arrays()
    if insert_order == "shuffled":
        order = rng.permutation(len(y))
    else:
        order = np.arange(len(y))
    for i in order:
        svm.increment(X[i], int(y[i]))
    return svm


def predict_population(svm: IncrementalSvm, train: LabeledSampleSet, n_pop: int,
                       bounds, rng, cfg: PredictorConfig | None = None
                       ) -> tuple[Population, IncrementalSvm]:
    """Train the classifier online, then filter random candidates.

    Returns exactly ``n_pop`` unevaluated individuals: candidates the
    updated classifier labels positive, topped up with unfiltered
    uniform draws once the attempt cap is reached.  Falls back to a
    fully random population (with a logged warning) when the classifier
    still cannot classify after training.
    """
    if n_pop < 1:
        raise ConfigurationError("population size must be >= 1")
    cfg = cfg or PredictorConfig()
    if train.size_per_class > 0:
        train_online(svm, train, rng, cfg.insert_order)
    lower = np.asarray(bounds[0], dtype=float)
    upper = np.asarray(bounds[1], dtype=float)
    dim = lower.shape[0]

    def draw(count):
        return lower + rng.random((count, dim)) * (upper - lower)

    if not svm.is_trained:
        logger.warning("classifier has seen only one class; returning a random population")
        members = [Individual(decision=x) for x in draw(n_pop)]
        return Population(members=members, capacity=n_pop), svm

    accepted: list[np.ndarray] = []
    attempts = 0
    cap = cfg.max_attempts_factor * n_pop
    while len(accepted) < n_pop and attempts < cap:
        batch = min(n_pop - len(accepted), cap - attempts)
        candidates = draw(batch)
        attempts += batch
        try:
            values = svm.decision_values(candidates)
        except UntrainedModelError:  # defensive; is_trained was checked
            break
        accepted.extend(candidates[values > 0.0])
    fillers = n_pop - len(accepted)
    if fillers > 0:
        level = logging.WARNING if not accepted else logging.INFO
        logger.log(
            level,
            "filter accepted %d/%d candidates within %d attempts; filling %d at random",
            len(accepted), n_pop, attempts, fillers,
        )
        accepted.extend(draw(fillers))
    members = [Individual(decision=x) for x in accepted[:n_pop]]
    return Population(members=members, capacity=n_pop), svm
