"""Checks on recorded flows: weighted distance monotonicity and speed bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import RegionSet, interface_distance, interpolate_at_crossings, set_distance, signed_distance
from .errors import TimeGridMismatch, ZeroInitialDistance
from .flow import Trajectory
from .grid import MetricSpec

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_UNMET = "hypothesis_unmet"


@dataclass(frozen=True)
class AvoidanceReport:
    times: np.ndarray
    D: np.ndarray
    weighted: np.ndarray
    lam: float
    tolerance: float
    worst_violation: float
    integrated_ok: bool
    status: str
    truncated: bool = False

    @property
    def verdict(self) -> bool:
        return self.status != FAIL

    def reweighted(self, lam: float) -> "AvoidanceReport":
        """Same distance series weighted by exp(-lam t)."""
        return _assemble(self.times, self.D, lam, self.tolerance, self.truncated, self.status)


# distances below this many cells are rounding noise on coincident curves
_CONTACT = 1e-9


def _common_times(trajX: Trajectory, trajY: Trajectory):
    n = min(len(trajX), len(trajY))
    if not np.allclose(trajX.times[:n], trajY.times[:n], rtol=0, atol=1e-12):
        raise TimeGridMismatch("trajectories are recorded at different times")
    full = max(len(trajX), len(trajY))
    if n < full and trajX.extinction_time is None and trajY.extinction_time is None:
        raise TimeGridMismatch("trajectories have different lengths without an extinction")
    return n, n < full


def distance_series(trajX: Trajectory, trajY: Trajectory, metric: MetricSpec) -> np.ndarray:
    n, _ = _common_times(trajX, trajY)
    return np.array([set_distance(trajX.states[k], trajY.states[k], metric) for k in range(n)])


def default_tolerance(metric: MetricSpec, *trajs: Trajectory) -> float:
    dt = max((t.dt or 0.0) for t in trajs) if trajs else 0.0
    return 2.0 * metric.grid.h + dt


def _assemble(times, D, lam, tol, truncated, status_hint=None):
    weighted = np.exp(-lam * times) * D
    drops = weighted[:-1] - weighted[1:]
    finite = np.isfinite(drops)
    worst = max(0.0, float(drops[finite].max())) if finite.any() else 0.0
    integrated = bool(np.all(weighted >= weighted[0] - tol))
    if status_hint == HYPOTHESIS_UNMET:
        status = HYPOTHESIS_UNMET
    else:
        status = PASS if worst <= tol else FAIL
    return AvoidanceReport(times, D, weighted, lam, tol, worst, integrated, status, truncated)


def avoidance_report(trajX: Trajectory, trajY: Trajectory, metric: MetricSpec,
                     tolerance: float | None = None, lam: float | None = None,
                     D: np.ndarray | None = None) -> AvoidanceReport:
    """Weighted distance exp(-lam t) d(X(t), Y(t)) and its monotonicity verdict.

    ``lam`` defaults to the metric's Ricci lower bound; any smaller value
    gives a weaker weight. If the initial distance is below 2h the
    hypothesis of the avoidance principle is not resolved on the grid and
    the status is ``hypothesis_unmet`` instead of a verdict.
    """
    n, truncated = _common_times(trajX, trajY)
    if lam is None:
        lam = metric.lambda_lower
    elif lam > metric.lambda_lower:
        raise ValueError("lam must not exceed the Ricci lower bound")
    if tolerance is None:
        tolerance = default_tolerance(metric, trajX, trajY)
    times = trajX.times[:n]
    if D is None:
        D = distance_series(trajX, trajY, metric)
    hint = HYPOTHESIS_UNMET if D[0] < 2.0 * metric.grid.h else None
    return _assemble(times, np.asarray(D, dtype=float), lam, tolerance, truncated, hint)


@dataclass(frozen=True)
class SpeedReport:
    times: np.ndarray
    distances: np.ndarray
    R: float
    h_fit: float
    h_user: float | None
    verdict: bool | None


def _fit_rate(times, d, R, factor=1.0):
    t = times[1:]
    if not len(t):
        return 0.0
    rates = (R - d[1:]) / (factor * t)
    rates = rates[np.isfinite(rates)]
    return max(0.0, float(rates.max())) if len(rates) else 0.0


def finite_speed_check(trajX: Trajectory, reference: RegionSet, metric: MetricSpec,
                       h_user: float | None = None, tolerance: float | None = None) -> SpeedReport:
    """Distance from X(t) to a fixed set, with the fitted approach speed.

    The fitted speed is the smallest h with d(t) >= R - h t at every sample.
    """
    dref = signed_distance(reference, metric)
    d = np.array([set_distance(reference, s, metric, dA=dref) for s in trajX.states])
    R = float(d[0])
    if not R > _CONTACT * metric.grid.h:
        raise ZeroInitialDistance("X(0) touches the reference set")
    h_fit = _fit_rate(trajX.times, d, R)
    verdict = None
    if h_user is not None:
        tol = default_tolerance(metric, trajX) if tolerance is None else tolerance
        verdict = bool(np.all(d >= R - h_user * trajX.times - tol))
    return SpeedReport(trajX.times.copy(), d, R, h_fit, h_user, verdict)


def escape_bound_check(traj: Trajectory, epsilon: float, metric: MetricSpec | None = None) -> float:
    """Largest recorded delta with every Z(t), t <= delta, inside the epsilon-tube of Z(0)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    metric = traj.metric if metric is None else metric
    d0 = interface_distance(traj.states[0], metric)
    delta = float(traj.times[0])
    for t, state in zip(traj.times, traj.states):
        vals = interpolate_at_crossings(state, d0)
        if vals.size and vals.max() > epsilon:
            break
        delta = float(t)
    return delta


@dataclass(frozen=True)
class ApproachReport:
    times: np.ndarray
    D: np.ndarray
    h2: float
    finite: bool
    stable: bool | None = None


def approach_rate_check(trajX: Trajectory, trajY: Trajectory, metric: MetricSpec,
                        refined: tuple[Trajectory, Trajectory, MetricSpec] | None = None) -> ApproachReport:
    """Smallest h2 with D(t) >= D(0) - 2 h2 t at every recorded time.

    With ``refined`` (the same pair on a finer grid) the report also states
    whether the fitted rate is stable: the two fits agree to within half
    their size plus the grid-induced slack 2h/t_max.
    """
    D = distance_series(trajX, trajY, metric)
    if not D[0] > _CONTACT * metric.grid.h:
        raise ZeroInitialDistance("the flows start in contact")
    times = trajX.times[:len(D)]
    h2 = _fit_rate(times, D, D[0], factor=2.0)
    stable = None
    if refined is not None:
        fine = approach_rate_check(*refined)
        slack = 2.0 * metric.grid.h / max(float(times[-1]), 1e-300)
        stable = bool(np.isfinite(fine.h2) and abs(fine.h2 - h2) <= 0.5 * max(h2, fine.h2) + slack)
    return ApproachReport(times, D, h2, bool(np.isfinite(h2)), stable)
