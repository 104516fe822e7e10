"""Exact incremental support vector machine (soft-margin, RBF kernel).

Samples arrive one at a time.  Each insertion grows the new coefficient
along the adiabatic path of the dual problem, migrating samples between
the margin set S (|margin| = 0, 0 <= alpha <= C), the error set E
(margin <= 0, alpha = C) and the remaining set R (margin >= 0,
alpha = 0) so that the state after every insertion is the exact optimum
of the batch quadratic program over all samples seen so far.

The bordered kernel system over S is tracked through its inverse, which
is expanded by a rank-one update when a vector joins the margin set and
deflated when one leaves; no linear system is ever solved from scratch
on the hot path.

A dense batch solver (`batch_oracle`, a maximal-violating-pair
coordinate method) is provided as an independent reference for tests and
for cross-validated kernel-scale selection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, ContractViolationError, as_vector

logger = logging.getLogger(__name__)

TOL_KKT = 1e-6   # set-membership tolerance on margins
TOL_EQ = 1e-8    # tolerance on sum(y * alpha) = 0
TOL_SING = 1e-10  # singularity guard for the bordered system
JITTER = 1e-10   # diagonal perturbation retried once on near-singularity

REMAINING, MARGIN, ERROR = 0, 1, 2


class UntrainedModelError(RuntimeError):
    """Classification was requested before both classes were seen."""


class DegenerateGeometryError(RuntimeError):
    """The bordered system became numerically singular."""


class _PathDeadlock(DegenerateGeometryError):
    """The adiabatic path cycled at a degenerate vertex (internal)."""


class OracleFailureError(RuntimeError):
    """The batch reference solver failed to converge (test infrastructure)."""


@dataclass(frozen=True)
class RbfKernel:
    """K(a, z) = exp(-scale * ||a - z||^2); K(x, x) = 1."""

    scale: float

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ConfigurationError(f"kernel scale must be positive, got {self.scale}")

    def __call__(self, a, z) -> float:
        a = np.asarray(a, dtype=float)
        z = np.asarray(z, dtype=float)
        if a.shape != z.shape:
            raise ContractViolationError("kernel arguments must have equal dimension")
        d2 = float(np.sum((a - z) ** 2))
        return math.exp(-self.scale * d2)

    def matrix(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Kernel matrix between the rows of A and the rows of B."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        d2 = np.sum(A**2, axis=1)[:, None] - 2.0 * (A @ B.T) + np.sum(B**2, axis=1)[None, :]
        return np.exp(-self.scale * np.maximum(d2, 0.0))


class IncrementalSvm:
    """Online binary classifier kept at the exact batch-QP optimum.

    Until both labels have been seen, samples are stored with zero
    coefficients and classification is refused.  A completed state is
    treated as immutable by readers; mutation (`increment`) is
    single-threaded.
    """

    def __init__(self, dim: int, kernel: RbfKernel, C: float = 10.0,
                 tol_kkt: float = TOL_KKT, tol_sing: float = TOL_SING):
        if C <= 0.0:
            raise ConfigurationError("penalty parameter C must be positive")
        self.dim = int(dim)
        self.kernel = kernel
        self.C = float(C)
        self.tol_kkt = tol_kkt
        self.tol_sing = tol_sing
        self.b = 0.0
        self.n = 0
        self.margin_indices: list[int] = []
        self.rinv = np.zeros((1, 1))
        cap, mcap = 64, 8
        self._x = np.zeros((cap, self.dim))
        self._sq = np.zeros(cap)
        self._y = np.zeros(cap)
        self._alpha = np.zeros(cap)
        self._g = np.zeros(cap)
        self._status = np.zeros(cap, dtype=np.int8)
        self._km = np.zeros((cap, mcap))  # kernel columns against the margin set
        self._class_counts = {1: 0, -1: 0}
        self._mutations_since_verify = 0
        self.recovery_count = 0
        self.dependent_kept = 0

    # -- basic views ---------------------------------------------------

    @property
    def num_samples(self) -> int:
        return self.n

    @property
    def is_trained(self) -> bool:
        return self._class_counts[1] > 0 and self._class_counts[-1] > 0

    @property
    def samples(self) -> np.ndarray:
        return self._x[: self.n]

    @property
    def labels(self) -> np.ndarray:
        return self._y[: self.n]

    @property
    def alphas(self) -> np.ndarray:
        return self._alpha[: self.n]

    def set_indices(self, which: int) -> np.ndarray:
        """Sample indices currently in the given set (REMAINING/MARGIN/ERROR)."""
        return np.flatnonzero(self._status[: self.n] == which)

    def margin(self, i: int) -> float:
        """Maintained KKT margin g_i = y_i f(x_i) - 1 of sample i."""
        if not 0 <= i < self.n:
            raise ContractViolationError(f"sample index {i} out of range")
        return float(self._g[i])

    # -- capacity ------------------------------------------------------

    def _ensure_capacity(self):
        cap = self._x.shape[0]
        if self.n < cap:
            return
        new = 2 * cap
        grow = lambda a, shape: np.concatenate([a, np.zeros(shape, dtype=a.dtype)])
        self._x = grow(self._x, (cap, self.dim))
        self._sq = grow(self._sq, cap)
        self._y = grow(self._y, cap)
        self._alpha = grow(self._alpha, cap)
        self._g = grow(self._g, cap)
        self._status = grow(self._status, cap)
        self._km = np.vstack([self._km, np.zeros((cap, self._km.shape[1]))])

    def _ensure_margin_capacity(self, needed: int | None = None):
        needed = needed if needed is not None else len(self.margin_indices) + 1
        mcap = self._km.shape[1]
        while mcap < needed:
            mcap *= 2
        if mcap > self._km.shape[1]:
            extra = np.zeros((self._km.shape[0], mcap - self._km.shape[1]))
            self._km = np.hstack([self._km, extra])

    # -- kernel plumbing -----------------------------------------------

    def _kernel_row(self, x: np.ndarray) -> np.ndarray:
        """Kernel of x against every stored sample."""
        X = self._x[: self.n]
        d2 = self._sq[: self.n] - 2.0 * (X @ x) + float(x @ x)
        return np.exp(-self.kernel.scale * np.maximum(d2, 0.0))

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        """f(x) for each row of X; requires both classes trained."""
        if not self.is_trained:
            raise UntrainedModelError("both classes must be present before classification")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        sv = np.flatnonzero(self._alpha[: self.n] > 0.0)
        if sv.size == 0:
            return np.full(X.shape[0], self.b)
        K = self.kernel.matrix(X, self._x[sv])
        return K @ (self._alpha[sv] * self._y[sv]) + self.b

    def decision_value(self, x) -> float:
        return float(self.decision_values(as_vector(x, self.dim))[0])

    def classify(self, x) -> int:
        """sign(f(x)) with sign(0) resolved to +1."""
        return 1 if self.decision_value(x) >= 0.0 else -1

    def _margin_of(self, i: int, row: np.ndarray) -> float:
        sv = np.flatnonzero(self._alpha[: self.n] > 0.0)
        f = float(row[sv] @ (self._alpha[sv] * self._y[sv])) + self.b
        return self._y[i] * f - 1.0

    # -- margin-set maintenance ----------------------------------------

    def expand_rinv(self, i: int, _col: np.ndarray | None = None) -> None:
        """Admit sample i into the margin set and grow the bordered inverse.

        Low-level: coefficients are not touched.  Raises
        DegenerateGeometryError when the new direction is (numerically)
        linearly dependent on the current margin set even after one
        diagonal jitter retry.
        """
        col = _col if _col is not None else self._kernel_row(self._x[i])
        y_i = self._y[i]
        s = self.margin_indices
        if not s:
            # Closed-form inverse of [[0, y], [y, 1]] (RBF diagonal is 1).
            self.rinv = np.array([[-1.0, y_i], [y_i, 0.0]])
        else:
            ys = self._y[s]
            eta = np.concatenate(([y_i], ys * y_i * col[s]))
            beta = -self.rinv @ eta
            gamma = 1.0 + float(eta[1:] @ beta[1:]) + y_i * beta[0]
            if abs(gamma) <= self.tol_sing:
                gamma += JITTER
            if abs(gamma) <= self.tol_sing:
                raise DegenerateGeometryError(
                    f"margin-set expansion with sample {i} is singular (gamma={gamma:.2e})"
                )
            k = len(s) + 1
            padded = np.zeros((k + 1, k + 1))
            padded[:k, :k] = self.rinv
            v = np.append(beta, 1.0)
            self.rinv = padded + np.outer(v, v) / gamma
            # A tiny pivot amplifies rounding by 1/gamma; verify right away.
            if abs(gamma) < 1e-4:
                self._mutations_since_verify = 1000
        self._ensure_margin_capacity()
        self._km[: self.n, len(self.margin_indices)] = col
        self.margin_indices.append(i)
        self._status[i] = MARGIN
        self._maybe_refresh_rinv()

    def deflate_rinv(self, i: int, to_status: int = REMAINING) -> None:
        """Remove sample i from the margin set and shrink the inverse."""
        s = self.margin_indices
        if i not in s:
            raise ContractViolationError(f"sample {i} is not a margin vector")
        pos = s.index(i)
        last = len(s) - 1
        if last == 0:
            self.rinv = np.zeros((1, 1))
            self.margin_indices = []
        else:
            if pos != last:
                # Margin order is not load-bearing: swap to the border edge
                # so the shrink is a cheap slice.
                p, q = pos + 1, last + 1
                self.rinv[[p, q]] = self.rinv[[q, p]]
                self.rinv[:, [p, q]] = self.rinv[:, [q, p]]
                self._km[: self.n, [pos, last]] = self._km[: self.n, [last, pos]]
                s[pos], s[last] = s[last], s[pos]
            k = last + 1
            rkk = self.rinv[k, k]
            if abs(rkk) <= self.tol_sing:
                raise DegenerateGeometryError(
                    f"margin-set deflation at sample {i} is singular (rkk={rkk:.2e})"
                )
            self.rinv = self.rinv[:k, :k] - np.outer(self.rinv[:k, k], self.rinv[k, :k]) / rkk
            s.pop()
            if abs(rkk) < 1e-4:
                self._mutations_since_verify = 1000
            self._maybe_refresh_rinv()
        self._status[i] = to_status

    def _maybe_refresh_rinv(self) -> None:
        """Periodically bound the rank-one update drift of the inverse.

        Every few dozen margin-set mutations the residual of the
        maintained inverse is measured against the bordered system (built
        from the cached kernel columns, so this is O(|S|^3)); a dense
        re-inversion is adopted only when it is actually tighter.
        """
        self._mutations_since_verify += 1
        if self._mutations_since_verify < 32:
            return
        self._mutations_since_verify = 0
        s = self.margin_indices
        if not s:
            return
        ls = len(s)
        ys = self._y[s]
        q = np.zeros((ls + 1, ls + 1))
        q[0, 1:] = ys
        q[1:, 0] = ys
        q[1:, 1:] = np.outer(ys, ys) * self._km[s, :ls]
        eye = np.eye(ls + 1)
        resid = np.max(np.abs(self.rinv @ q - eye))
        if resid <= 0.1e-6 * ls:
            return
        try:
            fresh = np.linalg.inv(q)
        except np.linalg.LinAlgError:
            fresh = np.linalg.pinv(q)
        if np.max(np.abs(fresh @ q - eye)) < resid:
            self.rinv = fresh

    # -- incremental training -------------------------------------------

    def increment(self, x, y: int) -> "IncrementalSvm":
        """Insert one labeled sample, restoring exact KKT optimality."""
        x = as_vector(x, self.dim)
        y = int(y)
        if y not in (-1, 1):
            raise ContractViolationError(f"label must be -1 or +1, got {y}")
        m = self._append(x, y)
        if not self.is_trained:
            # One-class phase: store only; b = y makes every margin exactly 0.
            self.b = float(y)
            self._g[: self.n] = self._y[: self.n] * self.b - 1.0
            return self
        row = self._kernel_row(x)
        self._km[m, : len(self.margin_indices)] = row[self.margin_indices]
        g_m = self._margin_of(m, row)
        self._g[m] = g_m
        if g_m > self.tol_kkt:
            return self  # already consistent: remains in R with alpha = 0
        if g_m >= -self.tol_kkt:
            # Sits exactly on the margin: admit it, or (when it is linearly
            # dependent on the margin set, e.g. a duplicate) leave it in the
            # remaining set, which is already consistent at g = 0.
            try:
                self.expand_rinv(m, _col=row)
            except DegenerateGeometryError:
                self.dependent_kept += 1
            return self
        undo = _UndoLog(self)
        try:
            try:
                self._grow_coefficient(m, row, undo)
            except _PathDeadlock:
                self._recover_exact()
        except DegenerateGeometryError as err:
            undo.rollback(self)
            self._status[m] = REMAINING
            self._alpha[m] = 0.0
            self._refresh_margins()
            logger.warning("degenerate insertion of sample %d left in remaining set: %s", m, err)
        self._repair_equality()
        self._canonicalize_bias()
        return self

    def _repair_equality(self) -> None:
        """Project the tiny float residual of sum(y * alpha) = 0 away.

        Long migration paths through a near-singular bordered system can
        round the equality constraint off by more than its tolerance; the
        residual is spread over strictly interior margin vectors, which
        perturbs every margin by far less than the membership tolerance.
        """
        n = self.n
        eq = float(np.sum(self._alpha[:n] * self._y[:n]))
        if abs(eq) <= 0.25 * TOL_EQ:
            return
        room = 2.0 * abs(eq)
        free = [
            (pos, j)
            for pos, j in enumerate(self.margin_indices)
            if room < self._alpha[j] < self.C - room
        ]
        if not free:
            return
        share = eq / len(free)
        cols = np.array([pos for pos, _ in free])
        idx = [j for _, j in free]
        self._alpha[idx] -= self._y[idx] * share
        df = -share * np.sum(self._km[:n, cols], axis=1)
        self._g[:n] += self._y[:n] * df

    def _canonicalize_bias(self) -> None:
        """Make the decision function canonical in the degenerate case.

        When every margin member sits on a coefficient bound the bias is
        only interval-constrained (a bound-sitting member pins it one-sided);
        demote those members to their bound set and center the bias so two
        solvers agree on f.  A strictly interior margin vector pins the bias
        already, in which case this is a no-op.
        """
        atol = 1e-9 * max(self.C, 1.0)
        if any(atol < self._alpha[j] < self.C - atol for j in self.margin_indices):
            return
        try:
            for j in list(self.margin_indices):
                dest = ERROR if self._alpha[j] >= self.C - atol else REMAINING
                self.deflate_rinv(j, to_status=dest)
        except DegenerateGeometryError:
            return  # keep the valid non-canonical state
        self._center_bias()

    def _center_bias(self) -> None:
        """With no margin vector the bias is only interval-constrained; pin
        it to the interval midpoint so the decision function is canonical."""
        n = self.n
        y = self._y[:n]
        g = self._g[:n]
        status = self._status[:n]
        rem, err = status == REMAINING, status == ERROR
        # Shift delta must keep g + y*delta >= 0 on R and <= 0 on E.
        lo_candidates = np.concatenate([-g[rem & (y > 0)], g[err & (y < 0)]])
        hi_candidates = np.concatenate([g[rem & (y < 0)], -g[err & (y > 0)]])
        lo = float(np.max(lo_candidates)) if lo_candidates.size else -math.inf
        hi = float(np.min(hi_candidates)) if hi_candidates.size else math.inf
        if lo == -math.inf and hi == math.inf:
            return
        if lo == -math.inf:
            delta = hi
        elif hi == math.inf:
            delta = lo
        else:
            delta = 0.5 * (lo + hi)
        self.b += delta
        self._g[:n] += y * delta

    def _append(self, x: np.ndarray, y: int) -> int:
        self._ensure_capacity()
        m = self.n
        self._x[m] = x
        self._sq[m] = float(x @ x)
        self._y[m] = float(y)
        self._alpha[m] = 0.0
        self._status[m] = REMAINING
        self._g[m] = 0.0
        self._km[m, : self._km.shape[1]] = 0.0
        self._class_counts[y] += 1
        self.n += 1
        return m

    def _grow_coefficient(self, m: int, row: np.ndarray, undo: "_UndoLog") -> None:
        """Adiabatic path: raise alpha_m until its margin reaches zero or C."""
        max_steps = 20 * (self.n + 8)
        stalled = 0
        for _ in range(max_steps):
            marker = (self._alpha[m], self.b, self._g[m])
            if not self.margin_indices:
                done = self._bootstrap_step(m, row, undo)
            else:
                done = self._path_step(m, row, undo)
            if done:
                return
            # Zero-length set migrations are legitimate at a shared vertex,
            # but a long run of them means the pivot sequence is cycling.
            stalled = stalled + 1 if marker == (self._alpha[m], self.b, self._g[m]) else 0
            if stalled > 64:
                raise _PathDeadlock(f"degenerate vertex while inserting sample {m}")
        raise _PathDeadlock(f"insertion path for sample {m} did not terminate")

    def _recover_exact(self) -> None:
        """Re-solve the active subsystem when the path deadlocks.

        All samples with nonzero coefficients (plus the margin set) are
        re-optimized directly by the dense coordinate solver while the
        zero-coefficient remainder stays fixed; any remaining vector whose
        margin the new solution violates is then re-processed through the
        regular path.  Rare: only degenerate vertex geometry gets here.
        """
        n = self.n
        snap = (self._alpha[:n].copy(), self._status[:n].copy(), self.b,
                list(self.margin_indices), self.rinv.copy())
        atol = 1e-9 * max(self.C, 1.0)
        try:
            for _round in range(8):
                sub = np.flatnonzero(
                    (self._alpha[:n] > atol) | (self._status[:n] == MARGIN)
                )
                viol = np.flatnonzero(
                    (self._status[:n] == REMAINING) & (self._g[:n] < -self.tol_kkt)
                )
                sub = np.union1d(sub, viol)
                if not (np.any(self._y[sub] > 0) and np.any(self._y[sub] < 0)):
                    raise DegenerateGeometryError("degenerate one-sided subsystem")
                K = self.kernel.matrix(self._x[sub], self._x[sub])
                a, b, gap = _smo_solve(K, self._y[sub], self.C, 1e-9, 500_000)
                if gap > 1e-8:
                    raise DegenerateGeometryError(f"recovery solve stalled (gap {gap:.2e})")
                self._alpha[:n] = 0.0
                self._alpha[sub] = a
                self.b = b
                eps = 1e-7 * max(self.C, 1.0)
                st = np.where(a <= eps, REMAINING, np.where(a >= self.C - eps, ERROR, MARGIN))
                self._status[:n] = REMAINING
                self._status[sub] = st
                self.margin_indices = [int(i) for i in sub[st == MARGIN]]
                if self.margin_indices:
                    bordered = bordered_system(self)
                    try:
                        self.rinv = np.linalg.inv(bordered)
                    except np.linalg.LinAlgError:
                        self.rinv = np.linalg.pinv(bordered)
                else:
                    self.rinv = np.zeros((1, 1))
                self._rebuild_margin_cache()
                self._refresh_margins()
                if not np.any((self._status[:n] == REMAINING) & (self._g[:n] < -self.tol_kkt)):
                    self.recovery_count += 1
                    return
            raise DegenerateGeometryError("recovery left violated remaining vectors")
        except DegenerateGeometryError:
            self._alpha[:n], self._status[:n] = snap[0], snap[1]
            self.b, self.margin_indices, self.rinv = snap[2], list(snap[3]), snap[4].copy()
            self._rebuild_margin_cache()
            self._refresh_margins()
            raise

    def _bootstrap_step(self, m: int, row: np.ndarray, undo: "_UndoLog") -> bool:
        """With an empty margin set only the bias can move; slide it until
        some margin hits zero.  Returns True when sample m is resolved."""
        n = self.n
        y_m = self._y[m]
        status = self._status[:n]
        # Margins change at rate y_i * y_m per unit of slide s (b += y_m * s).
        deltas = [-self._g[m]]
        indices = [m]
        err = np.flatnonzero(status == ERROR)
        err = err[self._y[err] == y_m]
        if err.size:
            deltas.extend(-self._g[err])
            indices.extend(int(i) for i in err)
        rem = np.flatnonzero(status == REMAINING)
        rem = rem[(self._y[rem] == -y_m) & (rem != m)]
        if rem.size:
            deltas.extend(self._g[rem])
            indices.extend(int(i) for i in rem)
        deltas = np.maximum(np.asarray(deltas, dtype=float), 0.0)
        pick = np.lexsort((indices, deltas))[0]
        s = deltas[pick]
        self.b += y_m * s
        self._g[:n] += self._y[:n] * y_m * s
        i = indices[pick]
        undo.note(self, i)
        self._g[i] = 0.0
        self.expand_rinv(i, _col=row if i == m else None)
        return i == m

    def _path_step(self, m: int, row: np.ndarray, undo: "_UndoLog") -> bool:
        """One linear segment of the path; returns True when m is resolved."""
        n = self.n
        s = self.margin_indices
        ls = len(s)
        y = self._y[:n]
        ys = self._y[s]
        eta = np.concatenate(([self._y[m]], ys * self._y[m] * row[s]))
        beta = -self.rinv @ eta
        # Margin sensitivities of every sample to d(alpha_m).
        base = self._y[m] * row[:n] + self._km[:n, :ls] @ (ys * beta[1:]) + beta[0]
        gamma = y * base
        gamma_m = float(gamma[m])

        deltas: list[float] = []
        indices: list[int] = []
        kinds: list[tuple] = []
        if gamma_m > self.tol_sing:
            deltas.append(-self._g[m] / gamma_m)
            indices.append(m)
            kinds.append(("join_m",))
        deltas.append(self.C - self._alpha[m])
        indices.append(m)
        kinds.append(("cap_m",))
        for pos, j in enumerate(s):
            bj = beta[1 + pos]
            if bj > self.tol_sing:
                deltas.append((self.C - self._alpha[j]) / bj)
                indices.append(j)
                kinds.append(("margin_out", j, ERROR))
            elif bj < -self.tol_sing:
                deltas.append(-self._alpha[j] / bj)
                indices.append(j)
                kinds.append(("margin_out", j, REMAINING))
        status = self._status[:n]
        # For the (large) error and remaining sets only the per-group winner
        # under (step, index) can be the global winner.
        err = np.flatnonzero(status == ERROR)
        err = err[gamma[err] > self.tol_sing]
        if err.size:
            d = np.maximum(-self._g[err] / gamma[err], 0.0)
            w = int(np.lexsort((err, d))[0])
            deltas.append(float(d[w]))
            indices.append(int(err[w]))
            kinds.append(("margin_in", int(err[w])))
        rem = np.flatnonzero(status == REMAINING)
        rem = rem[rem != m]
        rem = rem[gamma[rem] < -self.tol_sing]
        if rem.size:
            d = np.maximum(-self._g[rem] / gamma[rem], 0.0)
            w = int(np.lexsort((rem, d))[0])
            deltas.append(float(d[w]))
            indices.append(int(rem[w]))
            kinds.append(("margin_in", int(rem[w])))

        deltas_arr = np.maximum(np.asarray(deltas, dtype=float), 0.0)
        pick = int(np.lexsort((indices, deltas_arr))[0])
        step = float(deltas_arr[pick])

        self._alpha[m] += step
        self.b += beta[0] * step
        alpha_s = np.clip(self._alpha[s] + beta[1:] * step, 0.0, self.C)
        self._alpha[s] = alpha_s
        self._g[:n] += gamma * step
        self._g[s] = 0.0

        kind = kinds[pick]
        if kind[0] == "join_m":
            self._g[m] = 0.0
            self.expand_rinv(m, _col=row)
            return True
        if kind[0] == "cap_m":
            self._alpha[m] = self.C
            self._status[m] = ERROR
            return True
        if kind[0] == "margin_out":
            _, j, dest = kind
            undo.note(self, j)
            self._alpha[j] = self.C if dest == ERROR else 0.0
            self.deflate_rinv(j, to_status=dest)
            return False
        _, i = kind
        undo.note(self, i)
        self._g[i] = 0.0
        self.expand_rinv(i)
        return False

    def _refresh_margins(self) -> None:
        """Recompute every margin from scratch (rollback hygiene)."""
        n = self.n
        sv = np.flatnonzero(self._alpha[:n] > 0.0)
        if sv.size == 0:
            f = np.full(n, self.b)
        else:
            K = self.kernel.matrix(self._x[:n], self._x[sv])
            f = K @ (self._alpha[sv] * self._y[sv]) + self.b
        self._g[:n] = self._y[:n] * f - 1.0

    def _rebuild_margin_cache(self) -> None:
        self._ensure_margin_capacity(len(self.margin_indices))
        for pos, j in enumerate(self.margin_indices):
            self._km[: self.n, pos] = self._kernel_row(self._x[j])

    # -- diagnostics -----------------------------------------------------

    def diagnostics(self) -> dict:
        """JSON-friendly state dump (schema is informative, not a contract)."""
        n = self.n
        s = self.margin_indices
        out = {
            "num_samples": n,
            "margin_set": len(s),
            "error_set": int(np.sum(self._status[:n] == ERROR)),
            "remaining_set": int(np.sum(self._status[:n] == REMAINING)),
            "bias": self.b,
            "C": self.C,
            "kernel_scale": self.kernel.scale,
            "alpha_sum": float(np.sum(self._alpha[:n])),
            "equality_residual": float(np.sum(self._alpha[:n] * self._y[:n])),
            "max_margin_residual_S": float(np.max(np.abs(self._g[s]))) if s else 0.0,
        }
        return out


class _UndoLog:
    """Enough state to restore the machine when an insertion is abandoned.

    Coefficient changes along the path only touch margin members and the
    new sample, so the log stays small; the margin cache and all margins
    are recomputed on rollback (rollbacks are rare).
    """

    def __init__(self, svm: IncrementalSvm):
        self.b = svm.b
        self.margin = list(svm.margin_indices)
        self.rinv = svm.rinv.copy()
        self.touched: dict[int, tuple[float, int]] = {}
        for j in svm.margin_indices:
            self.touched[j] = (float(svm._alpha[j]), MARGIN)

    def note(self, svm: IncrementalSvm, i: int) -> None:
        if i not in self.touched:
            self.touched[i] = (float(svm._alpha[i]), int(svm._status[i]))

    def rollback(self, svm: IncrementalSvm) -> None:
        svm.b = self.b
        svm.margin_indices = list(self.margin)
        svm.rinv = self.rinv.copy()
        for i, (alpha, status) in self.touched.items():
            svm._alpha[i] = alpha
            svm._status[i] = status
        svm._rebuild_margin_cache()


# -- invariants ---------------------------------------------------------


def check_invariants(svm: IncrementalSvm, tol_kkt: float = TOL_KKT,
                     tol_eq: float = TOL_EQ, tol_mat_unit: float = 1e-6) -> None:
    """Verify the full KKT state from scratch; raises on any violation."""
    n = svm.n
    a = svm._alpha[:n]
    y = svm._y[:n]
    atol = 1e-9 * max(svm.C, 1.0)
    if np.any(a < -atol) or np.any(a > svm.C + atol):
        raise ContractViolationError("coefficient outside [0, C]")
    status = svm._status[:n]
    s_set = set(svm.margin_indices)
    if s_set != set(np.flatnonzero(status == MARGIN)):
        raise ContractViolationError("margin index list disagrees with status array")
    if len(s_set) != len(svm.margin_indices):
        raise ContractViolationError("duplicate margin index")
    eq = float(np.sum(a * y))
    if abs(eq) > tol_eq:
        raise ContractViolationError(f"sum(y * alpha) = {eq:.3e} exceeds {tol_eq}")
    # Margins recomputed from scratch.
    sv = np.flatnonzero(a > 0.0)
    if sv.size == 0:
        f = np.full(n, svm.b)
    else:
        K = svm.kernel.matrix(svm._x[:n], svm._x[sv])
        f = K @ (a[sv] * y[sv]) + svm.b
    g = y * f - 1.0
    if n and np.max(np.abs(g - svm._g[:n])) > 10 * tol_kkt:
        raise ContractViolationError("maintained margins drifted from recomputation")
    for i in range(n):
        if status[i] == MARGIN:
            if abs(g[i]) > tol_kkt:
                raise ContractViolationError(f"margin vector {i} has |g| = {abs(g[i]):.3e}")
        elif status[i] == ERROR:
            if g[i] > tol_kkt or abs(a[i] - svm.C) > atol:
                raise ContractViolationError(f"error vector {i} violates (g <= 0, alpha = C)")
        else:
            if g[i] < -tol_kkt or a[i] > atol:
                raise ContractViolationError(f"remaining vector {i} violates (g >= 0, alpha = 0)")
    # Bordered inverse consistency.
    s = svm.margin_indices
    if not s:
        if svm.rinv.shape != (1, 1):
            raise ContractViolationError("empty margin set must carry the 1x1 inverse slot")
        return
    bordered = bordered_system(svm)
    residual = np.max(np.abs(svm.rinv @ bordered - np.eye(len(s) + 1)))
    if residual > tol_mat_unit * max(len(s), 1):
        raise ContractViolationError(f"inverse residual {residual:.3e} for |S| = {len(s)}")


def bordered_system(svm: IncrementalSvm) -> np.ndarray:
    """The bordered margin-set matrix [[0, y_S], [y_S, Q_SS]]."""
    s = svm.margin_indices
    ys = svm._y[s]
    K = svm.kernel.matrix(svm._x[s], svm._x[s])
    q = np.zeros((len(s) + 1, len(s) + 1))
    q[0, 1:] = ys
    q[1:, 0] = ys
    q[1:, 1:] = np.outer(ys, ys) * K
    return q


# -- batch reference solver ----------------------------------------------


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """0.5 a'Qa - sum(a) with Q = yy' * K (the quantity being minimized)."""
    q = (alpha * y) @ K @ (alpha * y)
    return 0.5 * float(q) - float(np.sum(alpha))


def _smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float,
               max_iter: int) -> tuple[np.ndarray, float, float]:
    """Maximal-violating-pair coordinate descent on the dual.

    Returns (alpha, b, kkt_gap).  The gap is the final maximal KKT
    violation; callers decide whether it is acceptable.
    """
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    eps = 1e-12 * max(C, 1.0)
    gap = math.inf
    for _ in range(max_iter):
        crit = -y * grad
        up = ((y > 0) & (alpha < C - eps)) | ((y < 0) & (alpha > eps))
        low = ((y > 0) & (alpha > eps)) | ((y < 0) & (alpha < C - eps))
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(crit[up])])
        j = int(np.flatnonzero(low)[np.argmin(crit[low])])
        gap = crit[i] - crit[j]
        if gap <= tol:
            break
        quad = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        lam = gap / quad
        lam = min(lam, (C - alpha[i]) if y[i] > 0 else alpha[i])
        lam = min(lam, alpha[j] if y[j] > 0 else (C - alpha[j]))
        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        q_i = y * (y[i] * K[:, i])
        q_j = y * (y[j] * K[:, j])
        grad += q_i * (y[i] * lam) - q_j * (y[j] * lam)
    alpha = np.clip(alpha, 0.0, C)
    b = _bias_from_solution(alpha, y, grad, C)
    return alpha, b, gap


def _bias_from_solution(alpha: np.ndarray, y: np.ndarray, grad: np.ndarray, C: float) -> float:
    # The KKT conditions bracket the bias: max crit over the up-set <= b <=
    # min crit over the low-set, with crit = -y * grad; at convergence the
    # bracket width is the residual gap.
    eps = 1e-12 * max(C, 1.0)
    crit = -y * grad
    up = ((y > 0) & (alpha < C - eps)) | ((y < 0) & (alpha > eps))
    low = ((y > 0) & (alpha > eps)) | ((y < 0) & (alpha < C - eps))
    if up.any() and low.any():
        return float(0.5 * (np.max(crit[up]) + np.min(crit[low])))
    if up.any():
        return float(np.max(crit[up]))
    if low.any():
        return float(np.min(crit[low]))
    return 0.0


def batch_oracle(X: np.ndarray, y: np.ndarray, C: float, kernel: RbfKernel,
                 tol: float = 1e-9, max_iter: int = 2_000_000) -> IncrementalSvm:
    """Solve the batch dual directly and package the result as a state.

    Independent of the incremental path: plain coordinate descent plus a
    dense inversion of the bordered system.  Intended for test-scale
    problems (a few hundred samples).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ContractViolationError("batch oracle needs both classes")
    K = kernel.matrix(X, X)
    alpha, b, gap = _smo_solve(K, y, C, tol, max_iter)
    if gap > max(tol, 1e-8):
        raise OracleFailureError(f"batch solver stalled with KKT gap {gap:.3e}")
    svm = IncrementalSvm(X.shape[1], kernel, C=C)
    for i in range(len(y)):
        svm._append(X[i], int(y[i]))
    svm._alpha[: svm.n] = alpha
    svm.b = b
    svm._refresh_margins()
    eps = 1e-7 * max(C, 1.0)
    status = np.where(alpha <= eps, REMAINING, np.where(alpha >= C - eps, ERROR, MARGIN))
    svm._status[: svm.n] = status
    svm.margin_indices = [int(i) for i in np.flatnonzero(status == MARGIN)]
    if svm.margin_indices:
        bordered = bordered_system(svm)
        try:
            svm.rinv = np.linalg.inv(bordered)
        except np.linalg.LinAlgError:
            svm.rinv = np.linalg.pinv(bordered)
        svm._rebuild_margin_cache()
    return svm


# -- kernel-scale selection ------------------------------------------------


def median_heuristic_scale(X: np.ndarray, cap: int = 1024) -> float:
    """1 / median pairwise squared distance (deterministic subsample)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] > cap:
        stride = int(math.ceil(X.shape[0] / cap))
        X = X[::stride]
    d2 = (
        np.sum(X**2, axis=1)[:, None]
        - 2.0 * (X @ X.T)
        + np.sum(X**2, axis=1)[None, :]
    )
    upper = d2[np.triu_indices(X.shape[0], k=1)]
    med = float(np.median(upper)) if upper.size else 0.0
    return 1.0 / med if med > 0.0 else 1.0


def default_scale_grid(X: np.ndarray) -> list[float]:
    """Powers of two around the median-heuristic scale."""
    base = median_heuristic_scale(X)
    return [base * 2.0**k for k in range(-4, 5)]


def grid_search_scale(X: np.ndarray, y: np.ndarray, grid, C: float,
                      folds: int = 5, cv_tol: float = 1e-3,
                      cv_max_iter: int = 200_000) -> float:
    """Kernel scale with the best stratified 5-fold CV accuracy.

    Ties resolve to the smallest scale.  With fewer than ``folds``
    samples in either class the cross-validation is meaningless and the
    median-heuristic scale is returned instead.
    """
    grid = sorted(float(s) for s in grid)
    if not grid:
        raise ConfigurationError("scale grid must be non-empty")
    if len(grid) == 1:
        return grid[0]
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n_pos = int(np.sum(y > 0))
    n_neg = int(np.sum(y < 0))
    if min(n_pos, n_neg) < folds:
        return median_heuristic_scale(X)
    # Stratified round-robin folds; deterministic by construction.
    fold_id = np.empty(len(y), dtype=int)
    for cls in (1.0, -1.0):
        idx = np.flatnonzero(y == cls)
        fold_id[idx] = np.arange(len(idx)) % folds
    best_scale, best_acc = grid[0], -1.0
    for scale in grid:
        kernel = RbfKernel(scale)
        K = kernel.matrix(X, X)
        hits = 0
        for f in range(folds):
            test = fold_id == f
            train = ~test
            a, b, _ = _smo_solve(K[np.ix_(train, train)], y[train], C, cv_tol, cv_max_iter)
            fx = K[np.ix_(test, train)] @ (a * y[train]) + b
            pred = np.where(fx >= 0.0, 1.0, -1.0)
            hits += int(np.sum(pred == y[test]))
        acc = hits / len(y)
        if acc > best_acc:
            best_scale, best_acc = scale, acc
    return best_scale
