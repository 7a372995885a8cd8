"""Level-set curvature flow under conformal metrics, plus offset tubes."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .distance import RegionSet, _edge_crossings, interface_nodes, signed_distance
from .errors import CflViolated, EmptyRegion, InterfaceNearBoundary, LambdaNotBelowRicciBound
from .grid import MetricSpec

log = logging.getLogger(__name__)

BOUNDARY_MARGIN_NODES = 10


@dataclass(frozen=True)
class FlowParams:
    """Time stepping controls.

    ``reinit_every=None`` reinitializes adaptively: every ``check_every``
    steps the metric gradient norm on interface nodes is inspected and the
    field is rebuilt once it leaves ``grad_window``. An integer forces a fixed
    cadence. ``band`` (narrow-band half width, in units of h) requires a fixed
    cadence short enough that frozen values outside the band cannot reach
    the interface between rebuilds.
    """

    t_end: float
    dt: float | None = None
    cfl: float = 0.4
    reinit_every: int | None = None
    eps_reg: float = 1e-8
    band: float | None = None
    check_every: int = 10
    grad_window: tuple[float, float] = (0.5, 2.0)
    guard_boundary: bool = True

    def __post_init__(self):
        if self.band is not None and self.reinit_every is None:
            raise ValueError("narrow-band stepping needs a fixed reinit_every")
        if self.band is not None and self.reinit_every >= self.band - 5:
            raise ValueError("reinit_every must be smaller than band - 5 nodes")

    def resolve_dt(self, metric: MetricSpec) -> float:
        limit = max_stable_dt(metric, self.cfl)
        if self.dt is None:
            return limit
        if self.dt > limit * (1 + 1e-12):
            raise CflViolated(f"dt={self.dt:g} exceeds the stable limit {limit:g}")
        return self.dt


def max_stable_dt(metric: MetricSpec, cfl: float = 0.4) -> float:
    h = metric.grid.h
    return cfl * h * h / (4.0 * metric.max_inverse_conformal)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[RegionSet]
    metric: MetricSpec
    extinction_time: float | None = None
    dt: float | None = None
    steps: int = 0
    reinit_drift: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state_at(self, t: float) -> RegionSet | None:
        hit = np.nonzero(np.isclose(self.times, t, rtol=0, atol=1e-12))[0]
        return self.states[hit[0]] if len(hit) else None


@dataclass
class _MetricTerms:
    inv_conf: np.ndarray
    phix: np.ndarray
    phiy: np.ndarray

    @classmethod
    def of(cls, metric: MetricSpec) -> "_MetricTerms":
        phi = metric.phi.values
        h = metric.grid.h
        phix = np.zeros_like(phi)
        phiy = np.zeros_like(phi)
        phix[1:-1, :] = (phi[2:, :] - phi[:-2, :]) / (2 * h)
        phiy[:, 1:-1] = (phi[:, 2:] - phi[:, :-2]) / (2 * h)
        return cls(np.exp(-2.0 * phi), phix, phiy)


_terms_cache: dict[int, tuple[MetricSpec, _MetricTerms]] = {}


def _terms(metric: MetricSpec) -> _MetricTerms:
    hit = _terms_cache.get(id(metric))
    if hit is None or hit[0] is not metric:
        if len(_terms_cache) > 16:
            _terms_cache.clear()
        hit = (metric, _MetricTerms.of(metric))
        _terms_cache[id(metric)] = hit
    return hit[1]


def _step_array(u, metric, dt, eps, band):
    t = _terms(metric)
    out = np.empty_like(u)
    _kernels.curvature_step(u, out, t.inv_conf, t.phix, t.phiy, dt, metric.grid.h, eps,
                            np.inf if band is None else band)
    return out


def mcf_step(region: RegionSet, metric: MetricSpec, dt: float, cfl: float = 0.4,
             eps_reg: float = 1e-8, band: float | None = None) -> RegionSet:
    """One explicit Euler step of level-set curvature flow.

    Boundary curves move with normal velocity equal to their geodesic
    curvature in the metric; a Euclidean circle with ``u < 0`` inside shrinks.
    """
    limit = max_stable_dt(metric, cfl)
    if dt > limit * (1 + 1e-12):
        raise CflViolated(f"dt={dt:g} exceeds the stable limit {limit:g}")
    u = np.ascontiguousarray(region.u, dtype=float)
    return region.with_u(_step_array(u, metric, dt, eps_reg, band))


def crossing_drift(u_old: np.ndarray, u_new: np.ndarray, h: float) -> float:
    """Largest shift of sub-cell crossings between two fields with equal signs."""
    ex0, tx0, ey0, ty0 = _edge_crossings(u_old)
    ex1, tx1, ey1, ty1 = _edge_crossings(u_new)
    if not (np.array_equal(ex0, ex1) and np.array_equal(ey0, ey1)):
        return np.inf
    drift = 0.0
    if ex0.any():
        drift = max(drift, float(np.abs(tx0[ex0] - tx1[ex0]).max()))
    if ey0.any():
        drift = max(drift, float(np.abs(ty0[ey0] - ty1[ey0]).max()))
    return drift * h


def reinitialize(region: RegionSet, metric: MetricSpec, band: float | None = None) -> RegionSet:
    """Replace ``u`` by the signed geodesic distance to its own zero set.

    Signs are preserved node by node, so the zero set can only move inside
    the grid cells it already crosses.
    """
    if not region.has_interface:
        raise EmptyRegion("region has no interface to reinitialize from")
    return region.with_u(signed_distance(region, metric, band))


def _boundary_strip(grid):
    return grid.boundary_distance() < BOUNDARY_MARGIN_NODES * grid.h


def _check_boundary(u0, u, strip, h):
    flipped = strip & ((u0 > 0) != (u > 0)) & (np.abs(u0) > 0.5 * h)
    if flipped.any():
        i, j = np.argwhere(flipped)[0]
        raise InterfaceNearBoundary(
            f"interface moved within {BOUNDARY_MARGIN_NODES}h of the box boundary near node ({i}, {j})")


def _gradient_out_of_window(u, metric, window):
    near = interface_nodes(u)
    if not near.any():
        return False
    gx, gy = np.gradient(u, metric.grid.h, edge_order=1)
    g = np.hypot(gx[near], gy[near]) * np.exp(-metric.phi.values[near])
    return bool(g.min() < window[0] or g.max() > window[1])


def evolve(initial: RegionSet, metric: MetricSpec, params: FlowParams, record_times) -> Trajectory:
    """Evolve ``initial`` and record reinitialized states at ``record_times``.

    Recorded states are signed-distance copies; the running field is only
    rebuilt on the reinitialization schedule. Stops early once the interface
    disappears; the trajectory then ends at the last record before
    extinction and carries the extinction time.
    """
    record_times = np.unique(np.asarray(record_times, dtype=float))
    if record_times[0] < 0 or record_times[-1] > params.t_end + 1e-12:
        raise ValueError("record times must lie in [0, t_end]")
    dt = params.resolve_dt(metric)
    h = metric.grid.h
    band = None if params.band is None else params.band * h * float(metric.speed.min())

    region = reinitialize(initial, metric, band)
    u = np.ascontiguousarray(region.u)
    u0 = u.copy()
    strip = _boundary_strip(metric.grid)
    times, states = [], []
    t = 0.0
    steps = 0
    since_reinit = 0
    drift = 0.0
    extinction = None

    def rebuild(field):
        nonlocal drift
        new = signed_distance(region.with_u(field), metric, band)
        drift = max(drift, crossing_drift(field, new, h))
        return new

    for target in record_times:
        while t < target - 1e-14:
            step = min(dt, target - t)
            u = _step_array(u, metric, step, params.eps_reg, band)
            t = target if step < dt else t + step
            steps += 1
            since_reinit += 1
            if steps % params.check_every == 0 or t >= target - 1e-14:
                if not region.with_u(u).has_interface:
                    extinction = t
                    break
            if params.reinit_every is not None:
                due = since_reinit >= params.reinit_every
            else:
                due = steps % params.check_every == 0 and _gradient_out_of_window(u, metric, params.grad_window)
            if due:
                u = rebuild(u)
                since_reinit = 0
        if extinction is not None:
            break
        snapshot = u if since_reinit == 0 and steps else rebuild(u)
        if params.guard_boundary:
            _check_boundary(u0, snapshot, strip, h)
        times.append(target)
        states.append(region.with_u(snapshot.copy()))
    if extinction is not None:
        log.info("interface vanished at t=%.6g", extinction)
    return Trajectory(np.array(times), states, metric, extinction, dt, steps, drift)


def static_trajectory(region: RegionSet, metric: MetricSpec, times) -> Trajectory:
    """A flow that never moves (lines, points, or fixed reference sets)."""
    times = np.asarray(times, dtype=float)
    return Trajectory(times, [region] * len(times), metric)


def offset_flow(base: Trajectory, c: float, lam: float, metric: MetricSpec) -> Trajectory:
    """Tubes {p : d(p, X(t)) <= c * exp(lam * t)} around a recorded flow.

    Requires lam strictly below the metric's Ricci lower bound.
    """
    if c < 0:
        raise ValueError("offset radius c must be non-negative")
    if not lam < metric.lambda_lower:
        raise LambdaNotBelowRicciBound(
            f"lambda={lam:g} is not below the Ricci lower bound {metric.lambda_lower:g}")
    states = []
    for t, state in zip(base.times, base.states):
        sd = signed_distance(state, metric)
        states.append(RegionSet(state.grid, sd - c * np.exp(lam * t)))
    return Trajectory(base.times.copy(), states, metric, base.extinction_time, base.dt)
