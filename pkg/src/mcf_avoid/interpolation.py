"""Harmonic interpolation between two sets and its regular level curve.

The interpolant solves the 5-point Laplace equation on the offset region
K(rho), equal to 0 where the region meets the X side and 1 on the Y side.
For a conformal metric in 2D the Laplace-Beltrami operator is exp(-2 phi)
times the flat Laplacian, so the flat solve serves every supported metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg
from scipy.spatial import cKDTree

from .distance import (
    LABEL_AMBIGUOUS, LABEL_X, LABEL_Y, OffsetRegion, RegionSet, interface_nodes, signed_distance,
)
from .errors import ContainmentViolated, MissingBoundaryClass, NoRegularValue, SolverDiverged
from .grid import MetricSpec

RESIDUAL_TOL = 1e-10
THETA_MIN = 1e-3
BOUNDARY_MODES = ("cutcell", "node")


@dataclass(frozen=True, eq=False)
class HarmonicField:
    """Solution on the mask, extended by 0 on the X side and 1 on the Y side."""

    h: np.ndarray
    region: OffsetRegion
    residual: float
    iterations: int
    boundary: str

    @property
    def mask(self) -> np.ndarray:
        return self.region.mask

    @property
    def rho(self) -> float:
        return self.region.rho

    def gradient_norm(self) -> np.ndarray:
        gx, gy = np.gradient(self.h, self.region.grid.h, edge_order=1)
        return np.hypot(gx, gy)


def _cut_fraction(v_in, v_out, rho):
    """Fraction of the edge from the mask node to where the distance equals rho."""
    return (v_in - rho) / (v_in - v_out)


def harmonic_interpolant(region: OffsetRegion, metric: MetricSpec | None = None,
                         boundary: str = "cutcell", maxiter: int | None = None) -> HarmonicField:
    """Solve Laplace's equation on ``region.mask`` with 0/1 Dirichlet data.

    ``boundary="cutcell"`` places the Dirichlet value where the distance
    field crosses rho on each edge leaving the mask (symmetric ghost-value
    treatment, second order). ``boundary="node"`` pins labelled boundary
    nodes to their label value. Ambiguous edges or nodes carry no data.
    Box edges are natural (zero-flux) boundaries.
    """
    if boundary not in BOUNDARY_MODES:
        raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")
    mask, labels = region.mask, region.labels
    if not ((labels == LABEL_X).any() and (labels == LABEL_Y).any()):
        raise MissingBoundaryClass("offset region needs boundary nodes of both sides")
    dX, dY, rho = region.dX, region.dY, region.rho
    nx, ny = mask.shape

    fixed = np.zeros(mask.shape, dtype=bool)
    fixed_val = np.zeros(mask.shape)
    if boundary == "node":
        for lab, val in ((LABEL_X, 0.0), (LABEL_Y, 1.0)):
            fixed |= labels == lab
            fixed_val[labels == lab] = val

    diag = np.zeros(mask.shape)
    rhs = np.zeros(mask.shape)
    rows, cols = [], []
    idx = -np.ones(mask.shape, dtype=np.int64)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        src = (slice(max(0, -di), nx - max(0, di)), slice(max(0, -dj), ny - max(0, dj)))
        dst = (slice(max(0, di), nx - max(0, -di)), slice(max(0, dj), ny - max(0, -dj)))
        m_src = mask[src]
        m_dst = mask[dst]
        inner = m_src & m_dst
        diag[src] += inner
        ii, jj = np.nonzero(inner)
        rows.append((ii + src[0].start, jj + src[1].start))
        cols.append((ii + dst[0].start, jj + dst[1].start))
        if boundary == "cutcell":
            out = m_src & ~m_dst
            x_out, y_out = dX[dst] < rho, dY[dst] < rho
            for side, val, dist in ((x_out & ~y_out, 0.0, dX), (y_out & ~x_out, 1.0, dY)):
                e = out & side
                if not e.any():
                    continue
                theta = _cut_fraction(dist[src][e], dist[dst][e], rho)
                ii, jj = np.nonzero(e)
                ii = ii + src[0].start
                jj = jj + src[1].start
                near = theta < THETA_MIN
                fixed[ii[near], jj[near]] = True
                fixed_val[ii[near], jj[near]] = val
                w = 1.0 / np.maximum(theta, THETA_MIN)
                np.add.at(diag, (ii, jj), w)
                np.add.at(rhs, (ii, jj), w * val)

    free = mask & ~fixed
    idx[free] = np.arange(int(free.sum()))
    n = int(free.sum())
    h_full = np.zeros(mask.shape)
    h_full[fixed] = fixed_val[fixed]
    if n:
        r_i = np.concatenate([r[0] for r in rows])
        r_j = np.concatenate([r[1] for r in rows])
        c_i = np.concatenate([c[0] for c in cols])
        c_j = np.concatenate([c[1] for c in cols])
        a, b = idx[r_i, r_j], idx[c_i, c_j]
        keep = a >= 0
        a, b, c_i, c_j = a[keep], b[keep], c_i[keep], c_j[keep]
        coupled = b >= 0
        # edges to pinned nodes move to the right-hand side
        pinned = ~coupled
        np.add.at(rhs, (r_i[keep][pinned], r_j[keep][pinned]), fixed_val[c_i[pinned], c_j[pinned]])
        offdiag = sp.coo_matrix((-np.ones(int(coupled.sum())), (a[coupled], b[coupled])), shape=(n, n))
        A = (sp.diags(diag[free]) + offdiag).tocsr()
        b_vec = rhs[free]
        _check_components(A, b_vec, diag[free])
        M = sp.diags(1.0 / A.diagonal())
        sol, info = cg(A, b_vec, x0=np.full(n, 0.5), rtol=1e-14, atol=0.0, M=M,
                       maxiter=maxiter or 20 * n)
        if info < 0 or not np.all(np.isfinite(sol)):
            raise SolverDiverged(f"conjugate gradient failed (info={info})")
        res = float(np.max(np.abs(A @ sol - b_vec)))
        if res > RESIDUAL_TOL:
            raise SolverDiverged(f"residual {res:.3g} above {RESIDUAL_TOL:g}")
        h_full[free] = sol
    else:
        res = 0.0
    h_full[~mask & (dY < rho)] = 1.0
    h_full[~mask & (dX < rho)] = 0.0
    return HarmonicField(h_full, region, res, n, boundary)


def _check_components(A, b, diag):
    """Every connected block of unknowns must touch Dirichlet data."""
    offdiag_count = np.asarray(-(A - sp.diags(A.diagonal())).sum(axis=1)).ravel()
    anchored = A.diagonal() > offdiag_count + 1e-12
    ncomp, comp = connected_components(A, directed=False)
    has_anchor = np.zeros(ncomp, dtype=bool)
    np.logical_or.at(has_anchor, comp, anchored)
    if not has_anchor.all():
        raise MissingBoundaryClass(f"{int((~has_anchor).sum())} mask component(s) carry no boundary data")


# ---------------------------------------------------------------------------
# level selection and midsurface


def select_regular_value(hf: HarmonicField) -> float:
    """Level in [1/3, 2/3] where |grad h| stays away from zero on its band.

    Takes 1/2 when acceptable, otherwise the candidate 1/3 + k/48 with the
    largest band minimum of |grad h| (smallest such c on ties).
    """
    grid = hf.region.grid
    g_min = 1e-4 / grid.diameter
    gnorm = hf.gradient_norm()
    vals = hf.h[hf.mask]
    gm = gnorm[hf.mask]
    width = 2.0 * grid.h * float(gm.max())

    def band_min(c):
        sel = np.abs(vals - c) <= width
        return float(gm[sel].min()) if sel.any() else 0.0

    if band_min(0.5) > g_min:
        return 0.5
    candidates = [1.0 / 3.0 + k / 48.0 for k in range(17)]
    scores = [band_min(c) for c in candidates]
    best = int(np.argmax(scores))
    if scores[best] <= g_min:
        raise NoRegularValue("|grad h| vanishes near every candidate level")
    return candidates[best]


@dataclass(frozen=True, eq=False)
class Midsurface:
    """Omega = {h <= c} union {dX <= rho}; its boundary curve is Sigma."""

    c: float
    region: RegionSet
    normals: np.ndarray  # (nx, ny, 2), NaN away from the Sigma band
    band: np.ndarray
    hf: HarmonicField

    @property
    def sigma_nodes(self) -> np.ndarray:
        return np.argwhere(self.band)


def extract_midsurface(hf: HarmonicField, c: float, dX=None, rho: float | None = None,
                       metric: MetricSpec | None = None) -> Midsurface:
    """Build Omega's signed distance field and certify its containment.

    Raises ContainmentViolated if a node with dX <= rho falls outside Omega
    or a node with dY < rho falls inside it.
    """
    reg = hf.region
    dXv = reg.dX if dX is None else getattr(dX, "d", dX)
    rho = reg.rho if rho is None else rho
    dYv = reg.dY
    grid = reg.grid
    F = np.where(hf.mask, hf.h - c, 0.0)
    x_side = ~hf.mask & (dXv < rho)
    y_side = ~hf.mask & (dYv < rho) & ~x_side
    F[x_side] = dXv[x_side] - rho - c
    F[y_side] = rho - dYv[y_side] + 1.0 - c
    raw = RegionSet(grid, F)
    if metric is None:
        from .grid import make_metric
        metric = make_metric("euclidean", grid)
    omega = raw.with_u(signed_distance(raw, metric))

    bad_x = (dXv <= rho) & (omega.u > 0)
    bad_y = (dYv < rho) & (omega.u <= 0)
    bad = np.argwhere(bad_x | bad_y)
    if len(bad):
        raise ContainmentViolated(f"{len(bad)} node(s) violate the sandwich condition",
                                  [tuple(b) for b in bad])

    band = interface_nodes(np.asarray(omega.u)) & hf.mask
    gx, gy = np.gradient(hf.h, grid.h, edge_order=1)
    norm = np.hypot(gx, gy)
    normals = np.full(grid.shape + (2,), np.nan)
    ok = band & (norm > 0)
    normals[ok, 0] = gx[ok] / norm[ok]
    normals[ok, 1] = gy[ok] / norm[ok]
    return Midsurface(float(c), omega, normals, band, hf)


@dataclass(frozen=True)
class C1Report:
    max_angle: float
    min_grad: float
    n_nodes: int
    n_pairs: int


def uniform_c1_check(ms: Midsurface, dX, dY, delta: float) -> C1Report:
    """Normal variation on Sigma near the boundary of K(rho).

    Considers Sigma-band nodes whose distance to the boundary of K(rho) is
    below ``delta`` and reports the largest angle between normals of node
    pairs closer than ``delta``, plus the smallest |grad h| among them.
    """
    dXv = getattr(dX, "d", dX)
    dYv = getattr(dY, "d", dY)
    rho = ms.hf.rho
    grid = ms.region.grid
    near_dk = np.abs(np.minimum(dXv, dYv) - rho) < delta
    sel = ms.band & near_dk & np.isfinite(ms.normals[..., 0])
    nodes = np.argwhere(sel)
    if len(nodes) == 0:
        return C1Report(0.0, float("inf"), 0, 0)
    pts = np.column_stack([grid.x[nodes[:, 0]], grid.y[nodes[:, 1]]])
    nu = ms.normals[sel]
    gnorm = ms.hf.gradient_norm()[sel]
    pairs = cKDTree(pts).query_pairs(delta, output_type="ndarray")
    if len(pairs):
        cos = np.einsum("ij,ij->i", nu[pairs[:, 0]], nu[pairs[:, 1]])
        max_angle = float(np.arccos(np.clip(cos, -1.0, 1.0)).max())
    else:
        max_angle = 0.0
    return C1Report(max_angle, float(gnorm.min()), len(nodes), len(pairs))
