"""Geodesic distance fields, set distances and offset regions.

Regions are zero-sublevel sets ``{u <= 0}`` of a level-set function on the
grid. Distances are measured in the conformal metric by first-order Godunov
fast sweeping seeded with sub-cell interface distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EmptyOffsetRegion, EmptyRegion, NoBandNodes
from .grid import Grid, MetricSpec

LABEL_NONE = -1
LABEL_X = 0
LABEL_Y = 1
LABEL_AMBIGUOUS = 2

POINT_SEED_RADIUS = 10.0


@dataclass(frozen=True, eq=False)
class RegionSet:
    """Closed set ``{u <= 0}``.

    ``points`` holds isolated point sources (shape ``(k, 2)``); for a pure
    point set ``u`` is the Euclidean distance to the points and is never
    negative.
    """

    grid: Grid
    u: np.ndarray
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        if self.u.shape != self.grid.shape:
            raise ValueError("level-set array does not match grid")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("level-set array contains non-finite values")
        self.u.setflags(write=False)

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0 and not np.any(self.u <= 0.0)

    @property
    def has_interface(self) -> bool:
        if len(self.points):
            return True
        inside = self.u <= 0.0
        return bool(inside.any() and not inside.all())

    def with_u(self, u: np.ndarray) -> "RegionSet":
        return RegionSet(self.grid, u, self.points)


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Unsigned geodesic distance ``d`` to ``source``."""

    d: np.ndarray
    source: RegionSet

    @property
    def grid(self) -> Grid:
        return self.source.grid


def point_region(grid: Grid, centers) -> RegionSet:
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    X, Y = grid.mesh()
    u = np.min([np.hypot(X - cx, Y - cy) for cx, cy in centers], axis=0)
    return RegionSet(grid, u, centers)


# ---------------------------------------------------------------------------
# interface crossings


def _edge_crossings(u):
    """Sign changes of ``u > 0`` along x- and y-edges with interpolation fractions."""
    pos = u > 0.0
    ex = pos[:-1, :] != pos[1:, :]
    ey = pos[:, :-1] != pos[:, 1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        tx = u[:-1, :] / (u[:-1, :] - u[1:, :])
        ty = u[:, :-1] / (u[:, :-1] - u[:, 1:])
    return ex, np.clip(np.nan_to_num(tx), 0.0, 1.0), ey, np.clip(np.nan_to_num(ty), 0.0, 1.0)


def interface_points(region: RegionSet) -> np.ndarray:
    """Sub-cell zero crossings of ``region`` along grid edges, plus point sources."""
    grid = region.grid
    u = np.asarray(region.u)
    ex, tx, ey, ty = _edge_crossings(u)
    x, y, h = grid.x, grid.y, grid.h
    ii, jj = np.nonzero(ex)
    px = np.column_stack([x[ii] + tx[ii, jj] * h, y[jj]])
    ii, jj = np.nonzero(ey)
    py = np.column_stack([x[ii], y[jj] + ty[ii, jj] * h])
    return np.vstack([px, py, region.points])


def interpolate_at_crossings(region: RegionSet, values: np.ndarray) -> np.ndarray:
    """Linear interpolation of a nodal field at the zero crossings of ``region``."""
    u = np.asarray(region.u)
    ex, tx, ey, ty = _edge_crossings(u)
    ii, jj = np.nonzero(ex)
    t = tx[ii, jj]
    vx = values[ii, jj] + t * (values[ii + 1, jj] - values[ii, jj])
    ii, jj = np.nonzero(ey)
    t = ty[ii, jj]
    vy = values[ii, jj] + t * (values[ii, jj + 1] - values[ii, jj])
    out = [vx, vy]
    if len(region.points):
        out.append(_bilinear(region.grid, values, region.points))
    return np.concatenate(out)


def _bilinear(grid, values, pts):
    h = grid.h
    fx = (pts[:, 0] - grid.x[0]) / h
    fy = (pts[:, 1] - grid.y[0]) / h
    i = np.clip(np.floor(fx).astype(int), 0, grid.nx - 2)
    j = np.clip(np.floor(fy).astype(int), 0, grid.ny - 2)
    sx, sy = fx - i, fy - j
    return ((1 - sx) * (1 - sy) * values[i, j] + sx * (1 - sy) * values[i + 1, j]
            + (1 - sx) * sy * values[i, j + 1] + sx * sy * values[i + 1, j + 1])


def interface_nodes(u: np.ndarray) -> np.ndarray:
    """Nodes with a sign change of ``u > 0`` to at least one grid neighbour."""
    ex, _, ey, _ = _edge_crossings(u)
    near = np.zeros(u.shape, dtype=bool)
    near[:-1, :] |= ex
    near[1:, :] |= ex
    near[:, :-1] |= ey
    near[:, 1:] |= ey
    return near


def subcell_seeds(u: np.ndarray, h: float) -> np.ndarray:
    """Distance estimate |u| / |grad u| at nodes next to the interface, inf elsewhere.

    The gradient is the central difference (one-sided on the box edge). The
    estimate is exact for linear ``u`` and leaves crossings almost in place
    when ``u`` is already close to a distance function.
    """
    near = interface_nodes(u)
    seeds = np.full(u.shape, np.inf)
    if near.any():
        gx, gy = np.gradient(u, h, edge_order=1)
        g = np.hypot(gx[near], gy[near])
        seeds[near] = np.abs(u[near]) / np.maximum(g, 1e-300)
    return seeds


def _point_seeds(grid, metric, points, radius_nodes=POINT_SEED_RADIUS):
    """Metric length of straight segments from each point to nearby nodes.

    The segment integral of exp(phi) uses Simpson's rule on the bilinear
    interpolant of phi.
    """
    seeds = np.full(grid.shape, np.inf)
    if not len(points):
        return seeds
    X, Y = grid.mesh()
    phi = metric.phi.values
    s = np.linspace(0.0, 1.0, 9)
    w = np.array([1, 4, 2, 4, 2, 4, 2, 4, 1], dtype=float) / 24.0
    for cx, cy in points:
        r = np.hypot(X - cx, Y - cy)
        near = r <= radius_nodes * grid.h
        px, py = X[near], Y[near]
        acc = np.zeros(px.shape)
        for sk, wk in zip(s, w):
            pts = np.column_stack([cx + sk * (px - cx), cy + sk * (py - cy)])
            acc += wk * np.exp(_bilinear(grid, phi, pts))
        seeds[near] = np.minimum(seeds[near], r[near] * acc)
    return seeds


def _solve(seeds, metric, active=None, tol=0.0):
    grid = metric.grid
    d = seeds.copy()
    fixed = np.isfinite(seeds)
    if not fixed.any():
        raise EmptyRegion("no seed nodes for the distance solve")
    if active is None:
        active = np.ones(grid.shape, dtype=np.bool_)
        box = (0, grid.nx, 0, grid.ny)
    else:
        ii, jj = np.nonzero(active)
        box = (ii.min(), ii.max() + 1, jj.min(), jj.max() + 1)
    cycles = _kernels.fast_sweep(d, fixed, active, metric.speed, grid.h, tol, *box)
    if cycles < 0:
        raise RuntimeError("fast sweeping did not converge")
    return d


def eikonal_distance(region: RegionSet, metric: MetricSpec) -> DistanceField:
    """Geodesic distance to ``region``; zero on the region itself."""
    if region.is_empty:
        raise EmptyRegion("cannot measure distance to an empty region")
    u = np.asarray(region.u)
    seeds = subcell_seeds(u, metric.grid.h) * metric.speed
    seeds[u <= 0.0] = 0.0
    seeds = np.minimum(seeds, _point_seeds(metric.grid, metric, region.points))
    d = _solve(seeds, metric)
    d[~np.isfinite(d)] = np.inf
    return DistanceField(d, region)


def signed_distance(region: RegionSet, metric: MetricSpec, band: float | None = None) -> np.ndarray:
    """Signed geodesic distance to the interface of ``region`` (negative inside).

    With ``band`` set, only nodes with ``|u| <= band`` are solved and every
    other node is clamped to ``sign(u) * band``.
    """
    if not region.has_interface:
        raise EmptyRegion("region has no interface")
    u = np.asarray(region.u)
    seeds = subcell_seeds(u, metric.grid.h) * metric.speed
    seeds = np.minimum(seeds, _point_seeds(metric.grid, metric, region.points))
    active = None if band is None else (np.abs(u) <= band) | np.isfinite(seeds)
    d = _solve(seeds, metric, active)
    sign = np.where(u > 0.0, 1.0, -1.0)
    if band is not None:
        d = np.minimum(d, band)
    d[~np.isfinite(d)] = np.max(d[np.isfinite(d)])
    out = sign * d
    out[u == 0.0] = 0.0
    return out


def interface_distance(region: RegionSet, metric: MetricSpec) -> np.ndarray:
    """Unsigned geodesic distance to the boundary curve of ``region``."""
    return np.abs(signed_distance(region, metric))


def set_distance(A: RegionSet, B: RegionSet, metric: MetricSpec, dA: np.ndarray | None = None) -> float:
    """Distance between the boundary curves of ``A`` and ``B``.

    The signed distance to A's interface is interpolated at B's sub-cell
    crossings and the smallest magnitude is returned. Interpolating the
    signed field avoids the kink of |sd| when the curves are close. ``dA``
    may be a precomputed signed or unsigned field. An empty interface on
    either side gives inf.
    """
    if not A.has_interface or not B.has_interface:
        return float("inf")
    if dA is None:
        dA = signed_distance(A, metric)
    vals = np.abs(interpolate_at_crossings(B, dA))
    return float(vals.min()) if vals.size else float("inf")


# ---------------------------------------------------------------------------
# offset regions


@dataclass(frozen=True, eq=False)
class OffsetRegion:
    """Nodes of K(rho) = {min(dX, dY) >= rho} with boundary labels.

    ``labels`` is LABEL_NONE for interior mask nodes and outside the mask,
    LABEL_X / LABEL_Y for nodes touching excluded nodes of one side only, and
    LABEL_AMBIGUOUS otherwise.
    """

    mask: np.ndarray
    labels: np.ndarray
    rho: float
    dX: np.ndarray
    dY: np.ndarray
    grid: Grid

    @property
    def ambiguous_nodes(self) -> np.ndarray:
        return np.argwhere(self.labels == LABEL_AMBIGUOUS)


def offset_region(dX: DistanceField, dY: DistanceField, rho: float) -> OffsetRegion:
    if rho <= 0:
        raise ValueError("rho must be positive")
    x, y = dX.d, dY.d
    mask = np.minimum(x, y) >= rho
    if not mask.any():
        raise EmptyOffsetRegion(f"no node has distance >= {rho} from both sets")
    near_x = ~mask & (x < rho)
    near_y = ~mask & (y < rho)
    touch_x = np.zeros_like(mask)
    touch_y = np.zeros_like(mask)
    for sl_a, sl_b in _neighbour_slices():
        touch_x[sl_a] |= near_x[sl_b]
        touch_y[sl_a] |= near_y[sl_b]
    touch_x &= mask
    touch_y &= mask
    labels = np.full(mask.shape, LABEL_NONE, dtype=np.int8)
    labels[touch_x] = LABEL_X
    labels[touch_y] = LABEL_Y
    labels[touch_x & touch_y] = LABEL_AMBIGUOUS
    return OffsetRegion(mask, labels, float(rho), x, y, dX.grid)


def _neighbour_slices():
    s = slice(None)
    return [
        ((slice(1, None), s), (slice(None, -1), s)),
        ((slice(None, -1), s), (slice(1, None), s)),
        ((s, slice(1, None)), (s, slice(None, -1))),
        ((s, slice(None, -1)), (s, slice(1, None))),
    ]


# ---------------------------------------------------------------------------
# gradients and foot-point directions


def gradient(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Central differences, one-sided on the first and last node of each axis."""
    gx, gy = np.gradient(values, h, edge_order=1)
    return gx, gy


@dataclass(frozen=True)
class AlignmentReport:
    max_angle: float
    mean_angle: float
    n_nodes: int
    R: float
    nodes: np.ndarray


def foot_direction_alignment(dX: DistanceField, dY: DistanceField, metric: MetricSpec, delta: float) -> AlignmentReport:
    """Angle between grad dX and -grad dY on the near-equidistant band.

    The band holds nodes with |dX - R| <= delta/2 and |dY - R| <= delta/2
    where 2R is the set distance. The metric is conformal, so Euclidean
    angles equal metric angles.
    """
    R = 0.5 * set_distance(dX.source, dY.source, metric)
    band = (np.abs(dX.d - R) <= 0.5 * delta) & (np.abs(dY.d - R) <= 0.5 * delta)
    if not band.any():
        raise NoBandNodes("no nodes near the equidistant set")
    h = metric.grid.h
    ax, ay = gradient(dX.d, h)
    bx, by = gradient(dY.d, h)
    ax, ay, bx, by = ax[band], ay[band], -bx[band], -by[band]
    cos = (ax * bx + ay * by) / (np.hypot(ax, ay) * np.hypot(bx, by))
    angles = np.arccos(np.clip(cos, -1.0, 1.0))
    return AlignmentReport(float(angles.max()), float(angles.mean()), int(band.sum()), R, np.argwhere(band))


def exterior_ball_check(dX: DistanceField, node, n_samples: int = 16) -> float:
    """Largest |dX(c) - s| for c = foot + s n on the segment from the foot of ``p`` to ``p``.

    The foot is ``p - dX(p) n`` with ``n`` the unit gradient. If the ball of
    radius dX(p) around p is an exterior ball touching X at the foot, every
    smaller ball along the segment is one too, so dX grows exactly like s.
    Euclidean metric only; a value above a few h signals a defect.
    """
    grid = dX.grid
    d = dX.d
    i, j = node
    p = np.array(grid.node(i, j))
    gx, gy = gradient(d, grid.h)
    n = np.array([gx[i, j], gy[i, j]])
    n /= np.linalg.norm(n)
    dp = d[i, j]
    s = np.linspace(dp / n_samples, dp, n_samples)
    pts = (p - dp * n) + s[:, None] * n
    return float(np.abs(_bilinear(grid, d, pts) - s).max())
