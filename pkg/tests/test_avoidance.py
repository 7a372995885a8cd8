import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcf_avoid import avoidance
from mcf_avoid.avoidance import (
    approach_rate_check, avoidance_report, default_tolerance, distance_series, escape_bound_check,
    finite_speed_check,
)
from mcf_avoid.distance import RegionSet, point_region
from mcf_avoid.errors import TimeGridMismatch, ZeroInitialDistance
from mcf_avoid.flow import FlowParams, Trajectory, evolve, offset_flow, static_trajectory
from mcf_avoid.grid import Grid, make_metric
from mcf_avoid.oracles import oracle


@pytest.fixture(scope="module")
def flat():
    g = Grid.square(128)
    return g, make_metric("euclidean", g)


def lines(g, m, times, y0=-0.3, y1=0.4):
    X, Y = g.mesh()
    a = static_trajectory(RegionSet(g, Y - y0), m, times)
    b = static_trajectory(RegionSet(g, y1 - Y), m, times)
    return a, b


def test_static_lines_pass_with_zero_violation(flat):
    g, m = flat
    a, b = lines(g, m, np.linspace(0, 0.1, 6))
    rep = avoidance_report(a, b, m)
    assert rep.status == avoidance.PASS and rep.worst_violation == 0.0
    assert rep.integrated_ok
    assert np.allclose(rep.D, 0.7, atol=1e-12)
    assert len(rep.D) == len(rep.weighted) == len(rep.times)
    assert approach_rate_check(a, b, m).h2 == 0.0
    assert finite_speed_check(a, b.states[0], m).h_fit == 0.0


def test_concentric_small_grid(flat):
    g, m = flat
    X, Y = g.mesh()
    r = np.hypot(X, Y)
    times = np.linspace(0, 0.04, 5)
    a = evolve(RegionSet(g, r - 0.3), m, FlowParams(t_end=0.04), times)
    b = evolve(RegionSet(g, 0.8 - r), m, FlowParams(t_end=0.04), times)
    rep = avoidance_report(a, b, m)
    exact = np.sqrt(0.64 - 2 * times) - np.sqrt(0.09 - 2 * times)
    assert rep.status == avoidance.PASS
    assert np.all(np.abs(rep.D - exact) <= 0.03 * exact)
    assert rep.tolerance == pytest.approx(2 * g.h + a.dt)


def test_hyperbolic_oracle_satisfies_the_bound():
    # e^{t} (r_b(t) - r_a(t)) must itself be nondecreasing before it can judge a grid run
    t = np.linspace(0, 0.08, 81)
    D = oracle("hyperbolic_circle", {"r0": 1.2}, t).values - oracle("hyperbolic_circle", {"r0": 0.5}, t).values
    w = np.exp(t) * D
    assert np.all(np.diff(w) > 0)


def test_time_grid_mismatch(flat):
    g, m = flat
    a, _ = lines(g, m, [0.0, 0.1])
    _, b = lines(g, m, [0.0, 0.2])
    with pytest.raises(TimeGridMismatch):
        avoidance_report(a, b, m)
    _, c = lines(g, m, [0.0, 0.1, 0.2])
    with pytest.raises(TimeGridMismatch):
        avoidance_report(a, c, m)


def test_hypothesis_unmet(flat):
    g, m = flat
    a, b = lines(g, m, [0.0, 0.1], y0=0.0, y1=g.h)
    rep = avoidance_report(a, b, m)
    assert rep.status == avoidance.HYPOTHESIS_UNMET
    assert rep.verdict


def test_failure_is_reported(flat):
    g, m = flat
    a, b = lines(g, m, [0.0, 0.1, 0.2])
    rep = avoidance_report(a, b, m, D=np.array([0.7, 0.5, 0.6]))
    assert rep.status == avoidance.FAIL
    assert rep.worst_violation == pytest.approx(0.2)
    assert not rep.integrated_ok


def test_lambda_above_bound_rejected(flat):
    g, m = flat
    a, b = lines(g, m, [0.0, 0.1])
    with pytest.raises(ValueError):
        avoidance_report(a, b, m, lam=0.5)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 2.0), min_size=3, max_size=10), st.floats(0.0, 3.0))
def test_smaller_lambda_never_hurts_an_increasing_series(D, dlam):
    # exp(-lam t) D(t) is nondecreasing for nondecreasing D whenever lam <= 0
    D = np.sort(np.asarray(D))
    g = Grid.square(64)
    m = make_metric("euclidean", g)
    times = np.linspace(0, 1, len(D))
    a, b = lines(g, m, times)
    base = avoidance_report(a, b, m, D=D, tolerance=0.0)
    sub = base.reweighted(-dlam)
    assert base.status == avoidance.PASS and sub.status == avoidance.PASS


def test_finite_speed_shrinking_circle():
    g = Grid.square(200)
    m = make_metric("euclidean", g)
    X, Y = g.mesh()
    times = np.linspace(0, 0.05, 6)
    traj = evolve(RegionSet(g, np.hypot(X, Y) - 0.5), m, FlowParams(t_end=0.05), times)
    rep = finite_speed_check(traj, point_region(g, [(0.0, 0.0)]), m, h_user=2.5)
    exact = (0.5 - np.sqrt(0.25 - 2 * 0.05)) / 0.05
    assert exact == pytest.approx(2.254, abs=1e-3)
    assert rep.R == pytest.approx(0.5, abs=2 * g.h)
    assert rep.h_fit == pytest.approx(exact, rel=0.05)
    assert rep.verdict is True
    assert finite_speed_check(traj, point_region(g, [(0.0, 0.0)]), m, h_user=0.5, tolerance=0.0).verdict is False


def test_finite_speed_zero_distance(flat):
    g, m = flat
    a, b = lines(g, m, [0.0])
    with pytest.raises(ZeroInitialDistance):
        finite_speed_check(a, a.states[0], m)


def test_finite_speed_expanding_tube_vs_point(flat):
    # complement of a shrinking tube around a static line: its boundary moves
    # towards the line at speed c e^{-t} <= c
    g, m = flat
    X, Y = g.mesh()
    times = np.linspace(0, 0.5, 6)
    tube = offset_flow(static_trajectory(RegionSet(g, Y + 0.6), m, times), 0.5, -1.0, m)
    comp = Trajectory(tube.times, [s.with_u(-np.asarray(s.u)) for s in tube.states], m)
    rep = finite_speed_check(comp, point_region(g, [(0.0, -0.6)]), m, h_user=0.5)
    assert rep.verdict is True


def test_escape_bound_stationary_line(flat):
    g, m = flat
    a, _ = lines(g, m, np.linspace(0, 0.1, 5))
    assert escape_bound_check(a, 0.05) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        escape_bound_check(a, 0.0)


def test_escape_bound_shrinking_circle():
    g = Grid.square(128)
    m = make_metric("euclidean", g)
    X, Y = g.mesh()
    times = np.linspace(0, 0.08, 81)
    traj = evolve(RegionSet(g, np.hypot(X, Y) - 0.6), m, FlowParams(t_end=0.08), times)
    delta = escape_bound_check(traj, 0.05)
    # r0 - r(delta) = 0.05 with r = sqrt(r0^2 - 2t)
    exact = (0.36 - 0.55 ** 2) / 2
    assert delta == pytest.approx(exact, abs=2e-3)


def test_escape_bound_offset_tube():
    g = Grid.square(128)
    m = make_metric("euclidean", g)
    X, Y = g.mesh()
    times = np.concatenate([[0.0], np.arange(0.2, 0.25, 0.0005)])
    tube = offset_flow(static_trajectory(RegionSet(g, Y), m, times), 0.5, -1.0, m)
    # the complement grows; its boundary leaves the 0.1-tube when 0.5 e^{-t} = 0.4
    comp = Trajectory(tube.times, [s.with_u(-np.asarray(s.u)) for s in tube.states], m)
    delta = escape_bound_check(comp, 0.1)
    assert delta == pytest.approx(np.log(0.5 / 0.4), abs=1e-3)


def test_approach_rate_two_circles():
    g = Grid.square(128, half_width=1.3)
    m = make_metric("euclidean", g)
    X, Y = g.mesh()
    times = np.linspace(0, 0.03, 4)
    a = evolve(RegionSet(g, np.hypot(X + 0.75, Y) - 0.3), m, FlowParams(t_end=0.03), times)
    b = evolve(RegionSet(g, np.hypot(X - 0.75, Y) - 0.3), m, FlowParams(t_end=0.03), times)
    rep = approach_rate_check(a, b, m)
    assert rep.D[0] == pytest.approx(0.9, abs=2 * g.h)
    assert rep.h2 == 0.0 and rep.finite
    assert np.all(np.diff(rep.D) > 0)


def test_approach_rate_circle_vs_growing_region(flat):
    # static circle of radius 0.2 against the complement of a shrinking tube
    g, m = flat
    X, Y = g.mesh()
    times = np.linspace(0, 0.2, 5)
    tube = offset_flow(static_trajectory(RegionSet(g, Y + 0.6), m, times), 0.5, -1.0, m)
    comp = Trajectory(tube.times, [s.with_u(-np.asarray(s.u)) for s in tube.states], m)
    circ = static_trajectory(RegionSet(g, np.hypot(X, Y - 0.3) - 0.2), m, times)
    rep = approach_rate_check(circ, comp, m)
    assert rep.finite
    # the tube boundary moves at speed 0.5 e^{-t} <= 0.5, the circle is static
    assert rep.h2 <= 0.5 / 2 + g.h / times[1]


def test_approach_rate_zero_distance(flat):
    g, m = flat
    a, _ = lines(g, m, [0.0, 0.1])
    with pytest.raises(ZeroInitialDistance):
        approach_rate_check(a, a, m)


def test_default_tolerance(flat):
    g, m = flat
    traj = Trajectory(np.array([0.0]), [RegionSet(g, np.ones(g.shape))], m, dt=1e-4)
    assert default_tolerance(m, traj) == pytest.approx(2 * g.h + 1e-4)
