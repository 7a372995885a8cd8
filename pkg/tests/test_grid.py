import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcf_avoid.errors import DomainOutsideChart, UnsupportedKind
from mcf_avoid.grid import (
    Grid, ScalarField, eval_expression, gauss_curvature, make_metric, metric_edge_length,
    ricci_lower_bound,
)


def test_grid_rejects_small_or_anisotropic():
    with pytest.raises(ValueError):
        Grid(8, 8, -1, 1, -1, 1)
    with pytest.raises(ValueError):
        Grid(33, 33, -1, 1, -2, 2)


def test_coordinates_mirror_exact():
    g = Grid.square(101, half_width=0.7)
    assert np.array_equal(g.x, -g.x[::-1])
    assert g.x[50] == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63))
def test_node_index_round_trip(i, j):
    g = Grid.square(64, half_width=1.3, center=(0.2, -0.5))
    assert g.index(g.node(i, j)) == (i, j)
    assert g.node(*g.index(g.node(i, j))) == g.node(i, j)


def test_scalar_field_rejects_nan():
    g = Grid.square(32)
    v = np.zeros(g.shape)
    v[3, 3] = np.nan
    with pytest.raises(ValueError):
        ScalarField(g, v)


def test_euclidean_metric():
    m = make_metric("euclidean", Grid.square(32))
    assert m.lambda_lower == 0.0
    assert np.all(m.phi.values == 0.0)
    assert ricci_lower_bound(m) == 0.0


def test_poincare_outside_chart():
    with pytest.raises(DomainOutsideChart):
        make_metric("poincare_disk", Grid.square(64, half_width=0.9))


def test_unknown_kind():
    with pytest.raises(UnsupportedKind):
        make_metric("spherical", Grid.square(32))


def test_poincare_curvature_converges_to_minus_one():
    # K = -exp(-2 phi) Lap(phi) is identically -1 for phi = ln(2/(1-|p|^2))
    errs = []
    for n in (65, 129, 257):
        m = make_metric("poincare_disk", Grid.square(n, half_width=0.6))
        assert ricci_lower_bound(m) == -1.0
        errs.append(abs(ricci_lower_bound(m, discrete=True) + 1.0))
    assert errs[-1] < 5e-4
    ratio = errs[1] / errs[2]
    assert 3.0 <= ratio <= 5.0


def test_sphere_metric_has_curvature_plus_one():
    m = make_metric("custom_conformal", Grid.square(129, half_width=1.5), "log(2/(1+x**2+y**2))")
    K = gauss_curvature(m.phi)
    assert np.max(np.abs(K - 1.0)) < 1e-3
    assert abs(m.lambda_lower - 1.0) < 1e-3
    assert m.lambda_lower <= K.min()


def test_linear_phi_is_flat():
    m = make_metric("custom_conformal", Grid.square(65), "x")
    assert abs(m.lambda_lower) < 1e-10


def test_edge_lengths():
    g = Grid.square(64, half_width=0.5)
    e = make_metric("euclidean", g)
    assert metric_edge_length(e, (3, 4), (4, 4)) == pytest.approx(g.h, rel=1e-15)
    # nodes at +-h/2 around the origin: conformal factor exp(phi(0)) = 2
    p = make_metric("poincare_disk", g)
    assert metric_edge_length(p, (31, 31), (32, 31)) == pytest.approx(2 * g.h, rel=1e-3)
    c = make_metric("custom_conformal", g, "log(3) + 0*x")
    assert metric_edge_length(c, (0, 0), (0, 1)) == pytest.approx(3 * g.h, rel=1e-14)
    with pytest.raises(ValueError):
        metric_edge_length(e, (0, 0), (1, 1))


def test_expression_sandbox():
    x = np.zeros((2, 2))
    assert np.all(eval_expression("hypot(3, 4) + x", x, x) == 5.0)
    with pytest.raises(Exception):
        eval_expression("__import__('os')", x, x)
    with pytest.raises(Exception):
        eval_expression("open('f')", x, x)
