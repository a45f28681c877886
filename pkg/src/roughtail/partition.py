"""Greedy threshold partitions and the accumulated local variation.

The greedy sequence starts at the left end of the span and repeatedly stops
at the first time the control from the previous stop reaches alpha; the
count of interior stops is the path functional whose tail the experiments
module studies.  The accumulated alpha-local variation is the largest total
control over dissections whose every cell has control at most alpha, and
the two are linked by the deterministic bound  M <= (2N + 1) alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError, NumericError
from .variation import ControlQuery

GREEDY_REL_TOL = 1e-6
_REFINE_MAX_ROUNDS = 40
_REFINE_MAX_POINTS = 1500  # the final constrained DP still needs an O(m^3) table


@dataclass(frozen=True)
class GreedyPartition:
    """Stop times of the greedy scan.

    ``taus`` runs from the span start to its end; ``count`` is the number of
    interior stops, so len(taus) == count + 2 and interval_controls[i] is
    the control over [taus[i], taus[i+1]] (== alpha to relative tolerance on
    interior intervals).
    """

    alpha: float
    taus: np.ndarray
    interval_controls: np.ndarray
    count: int

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=np.float64)
        if taus.shape[0] != self.count + 2 or np.any(np.diff(taus) <= 0):
            raise NumericError("greedy stop times do not form a dissection")
        if self.interval_controls.shape[0] != self.count + 1:
            raise NumericError("per-interval controls inconsistent with the count")


def greedy_partition(ctrl: ControlQuery, alpha: float,
                     rel_tol: float = GREEDY_REL_TOL) -> GreedyPartition:
    """Greedy stop-time sequence and its interior count for threshold alpha."""
    if alpha <= 0:
        raise DimensionMismatchError(f"alpha must be positive, got {alpha}")
    s1, s2, s3 = ctrl._arrays
    g1, g2, g3 = ctrl._log_arrays()
    cap = int(ctrl.total() / alpha) + 4
    while True:
        taus = np.zeros(cap)
        omegas = np.zeros(cap)
        n = _kernels.greedy_scan(ctrl.path.times, s1, s2, s3, g1, g2, g3,
                                 ctrl.level_count, ctrl.p, alpha, rel_tol,
                                 taus, omegas)
        if n >= 0:
            break
        cap *= 2  # threshold near the tolerance edge can beat the a-priori cap
    k = n + 2
    return GreedyPartition(alpha, taus[:k].copy(), omegas[:k - 1].copy(), int(n))


@dataclass(frozen=True)
class LocalVariationResult:
    """Value and maximising dissection of the accumulated local variation.

    ``degenerate`` marks grids on which some single step already exceeds
    alpha; the value is then computed on an internally refined grid (the
    refinement times are reported) and remains a grid lower bound for the
    continuum quantity.  Callers seeing the flag should refine their grid.
    """

    value: float
    alpha: float
    dissection_times: np.ndarray
    degenerate: bool
    refined_points: int

    def __float__(self) -> float:
        return self.value


def _single_step_controls(ctrl: ControlQuery) -> np.ndarray:
    """Control of every single grid step: one cell has no interior points,
    so no dissection DP is needed, just the per-level increment norms."""
    x1, x2, x3 = ctrl.path.segment_increment_arrays()
    p = ctrl.p
    n = x1.shape[0]
    out = np.linalg.norm(x1.reshape(n, -1), axis=1) ** p
    if ctrl.level_count >= 2:
        out = out + np.linalg.norm(x2.reshape(n, -1), axis=1) ** (p / 2.0)
    if ctrl.level_count >= 3:
        out = out + np.linalg.norm(x3.reshape(n, -1), axis=1) ** (p / 3.0)
    return out


def accumulated_local_variation(ctrl: ControlQuery, alpha: float) -> LocalVariationResult:
    """Largest total control over dissections with per-cell control <= alpha.

    Computed by the constrained DP  best(j) = max_{i<j, omega(i,j)<=alpha}
    best(i) + omega(i, j); cells violating the constraint are simply not
    usable.  Exact over grid dissections (enumeration-checked in tests).
    """
    if alpha <= 0:
        raise DimensionMismatchError(f"alpha must be positive, got {alpha}")
    work = ctrl
    degenerate = False
    steps = _single_step_controls(work)
    rounds = 0
    while np.any(steps > alpha):
        degenerate = True
        rounds += 1
        if rounds > _REFINE_MAX_ROUNDS:
            raise NumericError("grid refinement for the local-variation DP did not converge")
        times = work.path.times
        new_times = [times[0]]
        for i in range(len(times) - 1):
            if steps[i] > alpha:
                new_times.append(0.5 * (times[i] + times[i + 1]))
            new_times.append(times[i + 1])
        if len(new_times) > _REFINE_MAX_POINTS:
            raise NumericError(
                f"refinement would need more than {_REFINE_MAX_POINTS} grid points")
        refined = ctrl.path.refine(np.array(new_times))
        work = ControlQuery(refined, ctrl.p)
        steps = _single_step_controls(work)
    if degenerate:
        table = work.omega_table(point_cap=_REFINE_MAX_POINTS + 1)
    else:
        table = work.omega_table()
    value, choice = _kernels.local_variation_dp(table, alpha)
    if value < 0:
        raise NumericError("no feasible dissection found after refinement")
    idx = [table.shape[0] - 1]
    while idx[-1] != 0:
        idx.append(int(choice[idx[-1]]))
    idx.reverse()
    times = work.path.times[np.array(idx, dtype=np.int64)]
    return LocalVariationResult(float(value), alpha, times, degenerate,
                                work.path.times.shape[0])


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of the deterministic M <= (2N + 1) alpha check."""

    alpha: float
    local_variation: float
    count: int
    bound: float
    passed: bool
    degenerate: bool

    @property
    def slack(self) -> float:
        return self.bound - self.local_variation


def check_m_n_inequality(ctrl: ControlQuery, alpha: float,
                         rel_tol: float = GREEDY_REL_TOL) -> InequalityReport:
    """Evaluate M, N and the bound (2N + 1) alpha on one path.

    The pass tolerance absorbs the bisection tolerance on the greedy stop
    times: pass iff M <= (2N + 1) alpha (1 + rel_tol).
    """
    gp = greedy_partition(ctrl, alpha, rel_tol)
    lv = accumulated_local_variation(ctrl, alpha)
    bound = (2 * gp.count + 1) * alpha
    passed = lv.value <= bound * (1.0 + rel_tol)
    return InequalityReport(alpha, lv.value, gp.count, bound, passed, lv.degenerate)
