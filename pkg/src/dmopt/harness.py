"""Environment loop, experiment variants, and run bookkeeping.

One run walks a dynamic problem through its change schedule: the first
environment starts from a random population; after every change the
next initial population comes from the configured variant (random
restart, classifier prediction with a persistent online model, reduced
oversampling rates, or a classifier rebuilt from scratch each change),
and the static optimizer then runs for tau_t generations.  Front quality
is recorded once per change against a fresh sample of the true front.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    ConfigurationError,
    Individual,
    Population,
    TimeContext,
    current_time,
    nondominated_mask,
)
from .isvm import IncrementalSvm, RbfKernel, default_scale_grid, grid_search_scale
from .metrics import MetricTrace, hv, igd, migd, mhv, ranksum_test, reference_point
from .optimizers import get_optimizer
from .posmote import PosmoteConfig, posmote
from .predictor import PredictorConfig, predict_population
from .problems import get_problem

logger = logging.getLogger(__name__)

VARIANTS = ("da", "isvm", "isvm-r0", "isvm-r3", "svm-retrain")
SIGNIFICANCE_LEVEL = 0.05
POF_SAMPLE_SIZE = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment cell needs, CLI-representable."""

    problem: str = "DF0"
    optimizer: str = "nsga2"
    variant: str = "isvm"
    n_t: int = 10
    tau_t: int = 10
    num_changes: int = 30
    runs: int = 20
    pop_size: int | None = None  # default: 100 for 2 objectives, 150 for 3
    seed: int = 1
    posmote_r: int = 5
    posmote_k: int = 5
    smote_direction: str = "extrapolate"
    svm_c: float = 10.0
    svm_scale: float | None = None  # fixed kernel scale; None = grid search
    grid_policy: str = "once"  # "once" | "per-change" (honored by svm-retrain)
    max_attempts_factor: int = 100
    trace_every_generation: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.n_t < 1 or self.tau_t < 1:
            raise ConfigurationError("n_t and tau_t must be positive")
        if self.num_changes < 1 or self.runs < 1:
            raise ConfigurationError("num_changes and runs must be positive")
        if self.grid_policy not in ("once", "per-change"):
            raise ConfigurationError(f"unknown grid policy {self.grid_policy!r}")
        if self.svm_c <= 0:
            raise ConfigurationError("svm_c must be positive")

    @property
    def effective_r(self) -> int:
        if self.variant == "isvm-r0":
            return 0
        if self.variant == "isvm-r3":
            return 3
        return self.posmote_r

    def resolved_pop_size(self, n_obj: int) -> int:
        if self.pop_size is not None:
            return self.pop_size
        return 100 if n_obj <= 2 else 150

    def snapshot(self) -> dict:
        return {
            "problem": self.problem,
            "optimizer": self.optimizer,
            "variant": self.variant,
            "n_t": self.n_t,
            "tau_t": self.tau_t,
            "num_changes": self.num_changes,
            "runs": self.runs,
            "pop_size": self.pop_size,
            "seed": self.seed,
            "posmote_r": self.posmote_r,
            "posmote_k": self.posmote_k,
            "smote_direction": self.smote_direction,
            "svm_c": self.svm_c,
            "svm_scale": self.svm_scale,
            "grid_policy": self.grid_policy,
            "max_attempts_factor": self.max_attempts_factor,
            "effective_r": self.effective_r,
        }


@dataclass
class RunRecord:
    """Everything measured in one (config, run_index) execution."""

    config: dict
    variant: str
    problem: str
    optimizer: str
    n_t: int
    tau_t: int
    run_index: int
    trace: MetricTrace
    evaluations: int = 0
    wall_ms: float = 0.0
    svm_sample_counts: list = field(default_factory=list)
    generation_trace: list = field(default_factory=list)  # (tau, t, igd) rows

    @property
    def migd(self) -> float:
        return migd(self.trace)

    @property
    def mhv(self) -> float:
        return mhv(self.trace)


class CountingProblem:
    """Delegating wrapper that counts objective evaluations."""

    def __init__(self, inner):
        self.inner = inner
        self.count = 0

    def __getattr__(self, name):
        return getattr(self.inner, name)

    @property
    def bounds(self):
        return self.inner.bounds

    def evaluate(self, x, t):
        self.count += 1
        return self.inner.evaluate(x, t)


def change_schedule(ctx: TimeContext) -> bool:
    """True exactly at the generations where the environment changes."""
    return ctx.tau > 0 and ctx.tau % ctx.tau_t == 0


def _random_population(n_pop, bounds, rng) -> Population:
    lower, upper = bounds
    decisions = lower + rng.random((n_pop, lower.shape[0])) * (upper - lower)
    return Population(members=[Individual(decision=x) for x in decisions], capacity=n_pop)


def _front_decisions(pop: Population, cap: int) -> np.ndarray:
    objs = pop.objectives()
    mask = nondominated_mask(objs)
    return pop.decisions()[mask][:cap]


def _pick_scale(cfg: ExperimentConfig, train) -> float:
    if cfg.svm_scale is not None:
        return cfg.svm_scale
    X, y = train.training_arrays()
    return grid_search_scale(X, y, default_scale_grid(X), C=cfg.svm_c)


def run_framework(cfg: ExperimentConfig, run_index: int = 0) -> RunRecord:
    """Execute one run of the configured variant and record its trace."""
    problem = CountingProblem(get_problem(cfg.problem))
    optimizer = get_optimizer(cfg.optimizer)
    n_pop = cfg.resolved_pop_size(problem.n_obj)
    streams = np.random.SeedSequence([cfg.seed, run_index]).spawn(4)
    rng_init = np.random.default_rng(streams[0])
    rng_opt = np.random.default_rng(streams[1])
    rng_sampler = np.random.default_rng(streams[2])
    rng_pred = np.random.default_rng(streams[3])

    pred_cfg = PredictorConfig(max_attempts_factor=cfg.max_attempts_factor)
    sampler_cfg = PosmoteConfig(r=cfg.effective_r, k=cfg.posmote_k,
                                direction=cfg.smote_direction)
    ctx = TimeContext(n_t=cfg.n_t, tau_t=cfg.tau_t, tau=0, num_changes=cfg.num_changes)
    started = time.perf_counter()
    gen_rows: list[tuple[int, float, float]] = []

    def observer_for(t):
        if not cfg.trace_every_generation:
            return None
        pof_star = problem.true_pof_sample(t, POF_SAMPLE_SIZE)

        def observe(gen, members):
            objs = np.array([m.objectives for m in members])
            front = objs[nondominated_mask(objs)]
            gen_rows.append((ctx.tau + gen + 1, t, igd(pof_star, front)))

        return observe

    t = current_time(ctx)
    pop = _random_population(n_pop, problem.bounds, rng_init)
    pos = optimizer.run(problem, t, pop, cfg.tau_t, rng_opt, on_generation=observer_for(t))
    ctx.advance(cfg.tau_t)

    svm: IncrementalSvm | None = None
    scale: float | None = None
    times: list[float] = []
    igd_values: list[float] = []
    hv_values: list[float] = []
    svm_counts: list[int] = []

    for change in range(1, cfg.num_changes + 1):
        if not change_schedule(ctx):
            raise ConfigurationError("environment loop desynchronized from the schedule")
        t = current_time(ctx)
        if cfg.variant == "da":
            pop = _random_population(n_pop, problem.bounds, rng_pred)
        else:
            previous_front = _front_decisions(pos, n_pop)
            train = posmote(previous_front, sampler_cfg, problem.bounds, rng_sampler)
            rebuild = svm is None or cfg.variant == "svm-retrain"
            if rebuild:
                if scale is None or (cfg.variant == "svm-retrain" and cfg.grid_policy == "per-change"):
                    scale = _pick_scale(cfg, train)
                svm = IncrementalSvm(problem.dim, RbfKernel(scale), C=cfg.svm_c)
            pop, svm = predict_population(svm, train, n_pop, problem.bounds, rng_pred, pred_cfg)
            svm_counts.append(svm.num_samples)
        pos = optimizer.run(problem, t, pop, cfg.tau_t, rng_opt, on_generation=observer_for(t))
        ctx.advance(cfg.tau_t)
        pof_star = problem.true_pof_sample(t, POF_SAMPLE_SIZE)
        estimate = pos.objectives()
        times.append(t)
        igd_values.append(igd(pof_star, estimate))
        hv_values.append(hv(estimate, reference_point(pof_star)))

    wall_ms = (time.perf_counter() - started) * 1000.0
    return RunRecord(
        config=cfg.snapshot(),
        variant=cfg.variant,
        problem=cfg.problem,
        optimizer=cfg.optimizer,
        n_t=cfg.n_t,
        tau_t=cfg.tau_t,
        run_index=run_index,
        trace=MetricTrace(times=times, igd_values=igd_values, hv_values=hv_values),
        evaluations=problem.count,
        wall_ms=wall_ms,
        svm_sample_counts=svm_counts,
        generation_trace=gen_rows,
    )


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """All runs of one cell, sequential and independently seeded."""
    records = []
    for run_index in range(cfg.runs):
        record = run_framework(cfg, run_index)
        logger.info("%s run %d: migd=%.4f mhv=%.4f (%.0f ms)",
                    cfg.variant, run_index, record.migd, record.mhv, record.wall_ms)
        records.append(record)
    return records


@dataclass
class SummaryRow:
    problem: str
    optimizer: str
    n_t: int
    tau_t: int
    variant: str
    runs: int
    migd_mean: float
    migd_std: float
    mhv_mean: float
    mhv_std: float
    migd_p: float | None = None  # rank-sum vs reference, None for the reference itself
    mhv_p: float | None = None
    migd_marker: str = ""
    mhv_marker: str = ""


def _marker(mean, ref_mean, p, lower_is_better) -> str:
    if p is None:
        return ""
    if p >= SIGNIFICANCE_LEVEL:
        return "="
    better = mean < ref_mean if lower_is_better else mean > ref_mean
    return "+" if better else "-"


def summarize(records: list[RunRecord], reference_variant: str = "da") -> list[SummaryRow]:
    """Per-cell mean/std of the run summaries plus rank-sum markers.

    Markers compare each variant against the reference variant of the
    same (problem, optimizer, n_t, tau_t) cell: '+' significantly
    better, '-' significantly worse, '=' no significant difference at
    the 0.05 level.
    """
    cells: dict[tuple, dict[str, list[RunRecord]]] = {}
    for r in records:
        key = (r.problem, r.optimizer, r.n_t, r.tau_t)
        cells.setdefault(key, {}).setdefault(r.variant, []).append(r)
    rows: list[SummaryRow] = []
    for key in sorted(cells):
        variants = cells[key]
        ref = variants.get(reference_variant)
        ref_migd = [r.migd for r in ref] if ref else None
        ref_mhv = [r.mhv for r in ref] if ref else None
        for variant in sorted(variants, key=lambda v: (v != reference_variant, v)):
            group = variants[variant]
            migd_values = [r.migd for r in group]
            mhv_values = [r.mhv for r in group]
            row = SummaryRow(
                problem=key[0], optimizer=key[1], n_t=key[2], tau_t=key[3],
                variant=variant, runs=len(group),
                migd_mean=float(np.mean(migd_values)),
                migd_std=float(np.std(migd_values)),
                mhv_mean=float(np.mean(mhv_values)),
                mhv_std=float(np.std(mhv_values)),
            )
            if ref and variant != reference_variant:
                row.migd_p = ranksum_test(migd_values, ref_migd)
                row.mhv_p = ranksum_test(mhv_values, ref_mhv)
                row.migd_marker = _marker(row.migd_mean, float(np.mean(ref_migd)),
                                          row.migd_p, lower_is_better=True)
                row.mhv_marker = _marker(row.mhv_mean, float(np.mean(ref_mhv)),
                                         row.mhv_p, lower_is_better=False)
            rows.append(row)
    return rows
