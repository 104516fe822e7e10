"""Performance indicators for front tracking.

IGD averages, over a reference sample of the true front, the distance to
the nearest estimated point.  HV is the exact Lebesgue measure of the
region between the estimated front and a reference point (2- and
3-objective only).  MIGD / MHV average the per-change values over a run,
and the rank-sum test compares per-run summary values between variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import ContractViolationError


@dataclass
class MetricTrace:
    """Per-change (t, igd, hv) triples for one run."""

    times: list[float]
    igd_values: list[float]
    hv_values: list[float]

    def __len__(self) -> int:
        return len(self.times)

    @property
    def migd(self) -> float:
        return migd(self)

    @property
    def mhv(self) -> float:
        return mhv(self)


def igd(pof_star: np.ndarray, pof_estimate: np.ndarray) -> float:
    """Mean distance from each reference point to its nearest estimated point."""
    ref = np.atleast_2d(np.asarray(pof_star, dtype=float))
    est = np.atleast_2d(np.asarray(pof_estimate, dtype=float))
    if ref.size == 0 or est.size == 0:
        raise ContractViolationError("igd is undefined for empty point sets")
    if ref.shape[1] != est.shape[1]:
        raise ContractViolationError("objective dimension mismatch in igd")
    return float(cdist(ref, est).min(axis=1).mean())


def reference_point(pof_star: np.ndarray, inflation: float = 1.0) -> np.ndarray:
    """Componentwise maximum of the sampled true front.

    ``inflation`` scales the span above the componentwise minimum and is
    1.0 (no offset) unless a sensitivity study asks otherwise.
    """
    pts = np.atleast_2d(np.asarray(pof_star, dtype=float))
    if pts.size == 0:
        raise ContractViolationError("reference point of an empty front")
    top = pts.max(axis=0)
    if inflation == 1.0:
        return top
    return pts.min(axis=0) + inflation * (top - pts.min(axis=0))


def _dominating_subset(points: np.ndarray, rp: np.ndarray) -> np.ndarray:
    """Points strictly below the reference point in every objective."""
    mask = np.all(points < rp, axis=1)
    return points[mask]


def _hv2d(points: np.ndarray, rp: np.ndarray) -> float:
    pts = _dominating_subset(points, rp)
    if pts.shape[0] == 0:
        return 0.0
    # Sweep left to right; only the staircase of nondominated points matters.
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    total = 0.0
    ceiling = rp[1]
    for x, y in pts:
        if y < ceiling:
            total += (rp[0] - x) * (ceiling - y)
            ceiling = y
    return float(total)


def _hv3d(points: np.ndarray, rp: np.ndarray) -> float:
    pts = _dominating_subset(points, rp)
    if pts.shape[0] == 0:
        return 0.0
    # Slice along the third objective: between consecutive z-levels the
    # cross-section is the 2-D union of boxes of all points at or below
    # the slice.
    order = np.argsort(pts[:, 2], kind="stable")
    pts = pts[order]
    levels = np.append(pts[:, 2], rp[2])
    total = 0.0
    for i in range(pts.shape[0]):
        depth = levels[i + 1] - levels[i]
        if depth > 0.0:
            total += depth * _hv2d(pts[: i + 1, :2], rp[:2])
    return float(total)


def hv(pof_estimate: np.ndarray, rp: np.ndarray) -> float:
    """Exact hypervolume dominated by the estimate, bounded by ``rp``.

    Points that do not strictly dominate the reference point contribute
    nothing.  Supports 2 and 3 objectives.
    """
    pts = np.atleast_2d(np.asarray(pof_estimate, dtype=float))
    rp = np.asarray(rp, dtype=float)
    if pts.shape[1] != rp.shape[0]:
        raise ContractViolationError("objective dimension mismatch in hv")
    if rp.shape[0] == 2:
        return _hv2d(pts, rp)
    if rp.shape[0] == 3:
        return _hv3d(pts, rp)
    raise ContractViolationError("hv supports 2 or 3 objectives only")


def hv_monte_carlo(points: np.ndarray, rp: np.ndarray, samples: int, rng) -> tuple[float, float]:
    """Monte-Carlo estimate of hv and its standard error (test oracle).

    Draws uniformly in the box [low, rp] spanned by the dominating points
    and counts draws dominated by at least one of them.
    """
    pts = _dominating_subset(np.atleast_2d(np.asarray(points, float)), np.asarray(rp, float))
    if pts.shape[0] == 0:
        return 0.0, 0.0
    low = pts.min(axis=0)
    box = float(np.prod(rp - low))
    draws = low + rng.random((samples, len(rp))) * (rp - low)
    hit = np.zeros(samples, dtype=bool)
    for p in pts:
        hit |= np.all(draws >= p, axis=1)
    frac = hit.mean()
    est = box * frac
    se = box * math.sqrt(max(frac * (1.0 - frac), 1e-30) / samples)
    return float(est), float(se)


def migd(trace: MetricTrace) -> float:
    if len(trace) == 0:
        raise ContractViolationError("migd of an empty trace")
    return float(np.mean(trace.igd_values))


def mhv(trace: MetricTrace) -> float:
    if len(trace) == 0:
        raise ContractViolationError("mhv of an empty trace")
    return float(np.mean(trace.hv_values))


def _rank_with_ties(values: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); tied values share the mean rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def ranksum_test(a, b) -> float:
    """Two-sided Mann-Whitney rank-sum p-value (normal approximation).

    Uses the tie-corrected variance; returns 1.0 when every value in both
    samples is identical (the statistic is degenerate there).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ContractViolationError("ranksum_test needs non-empty samples")
    pooled = np.concatenate([a, b])
    ranks = _rank_with_ties(pooled)
    n = n1 + n2
    # Tie correction factor: 1 - sum(t^3 - t) / (n^3 - n).
    _, counts = np.unique(pooled, return_counts=True)
    tie = 1.0 - float(np.sum(counts**3 - counts)) / (n**3 - n) if n > 1 else 0.0
    if tie == 0.0:
        return 1.0
    u1 = float(np.sum(ranks[:n1])) - n1 * (n1 + 1) / 2.0
    mean = n1 * n2 / 2.0
    sd = math.sqrt(tie * n1 * n2 * (n + 1) / 12.0)
    z = (u1 - mean) / sd
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return min(p, 1.0)
