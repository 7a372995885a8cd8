"""Compiled inner loops: Godunov fast sweeping and the level-set curvature step."""

import numba
import numpy as np

_MAX_CYCLES = 500


@numba.njit(cache=True)
def _godunov_update(a, fa, b, fb, h):
    """Upwind solution of ((d-a)/fa)^2 + ((d-b)/fb)^2 = h^2 with d >= max(a, b).

    ``fa``/``fb`` are edge speeds (trapezoidal averages), so a one-sided
    update equals the conformal length of the edge.
    """
    if a > b:
        a, b = b, a
        fa, fb = fb, fa
    if b - a >= fa * h:
        return a + fa * h
    al = 1.0 / (fa * fa)
    be = 1.0 / (fb * fb)
    s = al + be
    m = al * a + be * b
    disc = s * h * h - al * be * (a - b) * (a - b)
    return (m + np.sqrt(disc)) / s


@numba.njit(cache=True)
def _edge_bound(d, f, h, i, j, value):
    """min(value, d(q) + edge length) over the grid neighbours q of (i, j)."""
    nx, ny = d.shape
    fc = f[i, j]
    if i > 0:
        value = min(value, d[i - 1, j] + 0.5 * (fc + f[i - 1, j]) * h)
    if i < nx - 1:
        value = min(value, d[i + 1, j] + 0.5 * (fc + f[i + 1, j]) * h)
    if j > 0:
        value = min(value, d[i, j - 1] + 0.5 * (fc + f[i, j - 1]) * h)
    if j < ny - 1:
        value = min(value, d[i, j + 1] + 0.5 * (fc + f[i, j + 1]) * h)
    return value


@numba.njit(cache=True)
def _sweep(d, fixed, active, f, h, i0, i1, di, j0, j1, dj):
    nx, ny = d.shape
    change = 0.0
    i = i0
    while i != i1:
        j = j0
        while j != j1:
            if active[i, j] and fixed[i, j]:
                # seeds only drop where they contradict a neighbour plus one edge
                new = _edge_bound(d, f, h, i, j, d[i, j])
                if d[i, j] - new > change:
                    change = d[i, j] - new
                d[i, j] = new
            elif active[i, j]:
                fc = f[i, j]
                if i == 0:
                    ia = 1
                elif i == nx - 1:
                    ia = nx - 2
                elif d[i - 1, j] <= d[i + 1, j]:
                    ia = i - 1
                else:
                    ia = i + 1
                if j == 0:
                    jb = 1
                elif j == ny - 1:
                    jb = ny - 2
                elif d[i, j - 1] <= d[i, j + 1]:
                    jb = j - 1
                else:
                    jb = j + 1
                a = d[ia, j]
                b = d[i, jb]
                if a < np.inf or b < np.inf:
                    fa = 0.5 * (fc + f[ia, j])
                    fb = 0.5 * (fc + f[i, jb])
                    if a == np.inf:
                        new = b + fb * h
                    elif b == np.inf:
                        new = a + fa * h
                    else:
                        new = _godunov_update(a, fa, b, fb, h)
                    # the other two neighbours can be closer through a slower edge
                    new = _edge_bound(d, f, h, i, j, new)
                    old = d[i, j]
                    if new < old:
                        d[i, j] = new
                        if old == np.inf:
                            change = np.inf
                        elif old - new > change:
                            change = old - new
            j += dj
        i += di
    return change


@numba.njit(cache=True)
def fast_sweep(d, fixed, active, f, h, tol, lo_i, hi_i, lo_j, hi_j):
    """Solve |grad d| = f in place by alternating Gauss-Seidel sweeps.

    Nodes with ``active`` set are updated within the index box
    [lo_i, hi_i) x [lo_j, hi_j). Iterates full four-ordering cycles until the largest decrease in a cycle is <= tol. ``fixed`` nodes keep
    their seed unless it exceeds a neighbour plus the edge length, so the
    result satisfies |d(p) - d(q)| <= edge length on every active edge.
    Returns the cycle count.
    """
    for cycle in range(_MAX_CYCLES):
        c = 0.0
        c = max(c, _sweep(d, fixed, active, f, h, lo_i, hi_i, 1, lo_j, hi_j, 1))
        c = max(c, _sweep(d, fixed, active, f, h, hi_i - 1, lo_i - 1, -1, lo_j, hi_j, 1))
        c = max(c, _sweep(d, fixed, active, f, h, hi_i - 1, lo_i - 1, -1, hi_j - 1, lo_j - 1, -1))
        c = max(c, _sweep(d, fixed, active, f, h, lo_i, hi_i, 1, hi_j - 1, lo_j - 1, -1))
        if c <= tol:
            return cycle + 1
    return -1


@numba.njit(cache=True)
def curvature_step(u, out, inv_conf, phix, phiy, dt, h, eps, band):
    """One explicit Euler step of the conformal level-set curvature flow.

    u_t = exp(-2 phi) |grad u| [div(grad u/|grad u|_eps) + grad phi . grad u/|grad u|_eps]

    Box edges use mirror ghosts (homogeneous Neumann). Nodes with |u| > band
    are copied unchanged. Stencil sums are ordered so that reflecting the
    field in either axis reflects the result bit for bit.
    """
    nx, ny = u.shape
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)
    eps2 = eps * eps
    for i in range(nx):
        im = i - 1 if i > 0 else 1
        ip = i + 1 if i < nx - 1 else nx - 2
        for j in range(ny):
            c = u[i, j]
            if abs(c) > band:
                out[i, j] = c
                continue
            jm = j - 1 if j > 0 else 1
            jp = j + 1 if j < ny - 1 else ny - 2
            ux = (u[ip, j] - u[im, j]) * inv2h
            uy = (u[i, jp] - u[i, jm]) * inv2h
            uxx = ((u[ip, j] + u[im, j]) - 2.0 * c) * invh2
            uyy = ((u[i, jp] + u[i, jm]) - 2.0 * c) * invh2
            uxy = ((u[ip, jp] + u[im, jm]) - (u[ip, jm] + u[im, jp])) * (0.25 * invh2)
            gx2 = ux * ux
            gy2 = uy * uy
            g2 = gx2 + gy2
            geps2 = g2 + eps2
            geps = np.sqrt(geps2)
            num = (uxx * (gy2 + eps2) + uyy * (gx2 + eps2)) - 2.0 * ux * uy * uxy
            div = num / (geps2 * geps)
            drift = (phix[i, j] * ux + phiy[i, j] * uy) / geps
            out[i, j] = c + dt * inv_conf[i, j] * np.sqrt(g2) * (div + drift)
    return out
