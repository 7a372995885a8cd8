"""Uniform grids, sampled fields and conformal metrics g = exp(2*phi) * flat."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainOutsideChart, UnsupportedKind

EUCLIDEAN = "euclidean"
POINCARE_DISK = "poincare_disk"
CUSTOM_CONFORMAL = "custom_conformal"
METRIC_KINDS = (EUCLIDEAN, POINCARE_DISK, CUSTOM_CONFORMAL)

_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in (
        "sqrt", "exp", "log", "sin", "cos", "tan", "tanh", "cosh", "sinh",
        "arctanh", "arctan", "arctan2", "abs", "minimum", "maximum", "pi", "hypot",
    )
}


def eval_expression(expr: str, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate an expression in ``x`` and ``y`` with numpy math functions.

    Only the names in a fixed whitelist are visible; builtins are disabled.
    """
    namespace = dict(_EXPR_NAMESPACE, x=x, y=y)
    value = eval(compile(expr, "<expression>", "eval"), {"__builtins__": {}}, namespace)
    return np.broadcast_to(np.asarray(value, dtype=float), x.shape).copy()


@dataclass(frozen=True)
class Grid:
    """Node-centred grid with equal spacing in x and y.

    Arrays on the grid have shape ``(nx, ny)`` and are indexed ``[i, j]`` with
    ``i`` along x. Node coordinates are ``center + (i - (n-1)/2) * h`` so a
    domain symmetric about the origin gives mirror-exact coordinates.
    """

    nx: int
    ny: int
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if self.nx < 16 or self.ny < 16:
            raise ValueError("grid needs at least 16 nodes per axis")
        hx = (self.xmax - self.xmin) / (self.nx - 1)
        hy = (self.ymax - self.ymin) / (self.ny - 1)
        if hx <= 0 or abs(hx - hy) > 1e-12 * hx:
            raise ValueError(f"unequal or non-positive spacing: hx={hx!r}, hy={hy!r}")

    @classmethod
    def square(cls, n: int, half_width: float = 1.0, center=(0.0, 0.0)) -> "Grid":
        cx, cy = center
        return cls(n, n, cx - half_width, cx + half_width, cy - half_width, cy + half_width)

    @property
    def h(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.xmax - self.xmin, self.ymax - self.ymin))

    @property
    def x(self) -> np.ndarray:
        return self._axis(self.xmin, self.xmax, self.nx)

    @property
    def y(self) -> np.ndarray:
        return self._axis(self.ymin, self.ymax, self.ny)

    def _axis(self, lo, hi, n):
        center = 0.5 * (lo + hi)
        return center + (np.arange(n) - 0.5 * (n - 1)) * self.h

    def node(self, i: int, j: int) -> tuple[float, float]:
        h = self.h
        return (
            0.5 * (self.xmin + self.xmax) + (i - 0.5 * (self.nx - 1)) * h,
            0.5 * (self.ymin + self.ymax) + (j - 0.5 * (self.ny - 1)) * h,
        )

    def index(self, p) -> tuple[int, int]:
        """Nearest node index of point ``p``."""
        h = self.h
        i = int(round((p[0] - 0.5 * (self.xmin + self.xmax)) / h + 0.5 * (self.nx - 1)))
        j = int(round((p[1] - 0.5 * (self.ymin + self.ymax)) / h + 0.5 * (self.ny - 1)))
        return i, j

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def sample(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
        X, Y = self.mesh()
        return np.asarray(fn(X, Y), dtype=float)

    def boundary_distance(self) -> np.ndarray:
        """Euclidean distance of every node to the box boundary."""
        X, Y = self.mesh()
        return np.minimum.reduce([X - self.xmin, self.xmax - X, Y - self.ymin, self.ymax - Y])


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError("field shape does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class MetricSpec:
    kind: str
    phi: ScalarField
    lambda_lower: float
    expression: str | None = field(default=None, compare=False)

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    @property
    def speed(self) -> np.ndarray:
        """Local length scale exp(phi): metric length per unit Euclidean length."""
        return np.exp(self.phi.values)

    @property
    def max_inverse_conformal(self) -> float:
        """max over the grid of exp(-2*phi)."""
        return float(np.max(np.exp(-2.0 * self.phi.values)))


def poincare_phi(X, Y):
    return np.log(2.0 / (1.0 - (X * X + Y * Y)))


def make_metric(kind: str, grid: Grid, phi_expression: str | None = None) -> MetricSpec:
    kind = kind.lower()
    if kind == EUCLIDEAN:
        phi = np.zeros(grid.shape)
        return MetricSpec(EUCLIDEAN, ScalarField(grid, phi), 0.0)
    if kind == POINCARE_DISK:
        corners = [(grid.xmin, grid.ymin), (grid.xmin, grid.ymax),
                   (grid.xmax, grid.ymin), (grid.xmax, grid.ymax)]
        if max(np.hypot(*c) for c in corners) >= 1.0:
            raise DomainOutsideChart("Poincare disk grid must lie strictly inside the unit disk")
        metric = MetricSpec(POINCARE_DISK, ScalarField(grid, grid.sample(poincare_phi)), -1.0)
        return metric
    if kind == CUSTOM_CONFORMAL:
        if phi_expression is None:
            raise ValueError("custom conformal metric needs a phi expression")
        phi = grid.sample(lambda X, Y: eval_expression(phi_expression, X, Y))
        field_ = ScalarField(grid, phi)
        K = gauss_curvature(field_)
        return MetricSpec(CUSTOM_CONFORMAL, field_, float(K.min()), expression=phi_expression)
    raise UnsupportedKind(f"unknown metric kind {kind!r}")


def gauss_curvature(phi: ScalarField) -> np.ndarray:
    """K = -exp(-2 phi) * Laplacian(phi) on interior nodes (5-point stencil)."""
    p = phi.values
    h = phi.grid.h
    lap = ((p[2:, 1:-1] + p[:-2, 1:-1]) + (p[1:-1, 2:] + p[1:-1, :-2]) - 4.0 * p[1:-1, 1:-1]) / (h * h)
    return -np.exp(-2.0 * p[1:-1, 1:-1]) * lap


def ricci_lower_bound(metric: MetricSpec, discrete: bool = False) -> float:
    """Lower bound for the Ricci (= Gauss, in 2D) curvature.

    Euclidean and Poincare-disk metrics return their closed-form value unless
    ``discrete`` is set, in which case the grid minimum is returned for all kinds.
    """
    if not discrete and metric.kind in (EUCLIDEAN, POINCARE_DISK):
        return metric.lambda_lower
    return float(gauss_curvature(metric.phi).min())


def metric_edge_length(metric: MetricSpec, p, q) -> float:
    """Trapezoidal conformal length of the grid edge between nodes ``p`` and ``q``."""
    (i0, j0), (i1, j1) = p, q
    grid = metric.grid
    if abs(i0 - i1) + abs(j0 - j1) != 1:
        raise ValueError("nodes are not grid neighbours")
    f = metric.speed
    return grid.h * 0.5 * float(f[i0, j0] + f[i1, j1])
