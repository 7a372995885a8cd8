"""Run one scenario end to end: flows, reports, CSV and SVG output."""

from __future__ import annotations

import csv
import dataclasses
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import avoidance
from .config import EXPECT_UNMET, ScenarioConfig, load_config
from .distance import eikonal_distance, offset_region, set_distance
from .flow import FlowParams, evolve, offset_flow
from .interpolation import extract_midsurface, harmonic_interpolant, select_regular_value, uniform_c1_check
from .oracles import oracle
from .svg import render_svg

log = logging.getLogger(__name__)

CSV_HEADER = ("t", "d_XY", "d_XM", "d_MY", "weighted_XY", "status")
THREADS_ENV = "MCF_AVOID_THREADS"


def fmt(v: float) -> str:
    v = float(v)
    if v == np.inf:
        return "inf"
    return format(v, ".9g")


@dataclass
class ScenarioResult:
    name: str
    checks: dict
    rows: list
    report: avoidance.AvoidanceReport
    outdir: Path | None = None
    details: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 0 if all(self.checks.values()) else 1

    def summary(self) -> str:
        marks = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in self.checks.items())
        return f"{self.name}: {self.report.status} [{marks}]"


def apply_overrides(cfg: ScenarioConfig, grid_n=None, t_end=None, tolerance=None) -> ScenarioConfig:
    changes = {}
    if grid_n is not None:
        changes["grid_n"] = int(grid_n)
    if t_end is not None:
        changes["flow_t_end"] = float(t_end)
    if tolerance is not None:
        changes["report_tolerance"] = float(tolerance)
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _pad(values, n, fill=np.inf):
    out = np.full(n, fill, dtype=float)
    out[:len(values)] = values
    return out


def _oracle_distance(cfg: ScenarioConfig, times: np.ndarray, dt: float) -> np.ndarray:
    r_in, r_out = cfg.check_radii
    kind = "euclid_circle" if cfg.check_oracle == "euclid_concentric" else "hyperbolic_circle"
    step = min(1e-4, dt / 10)
    inner = oracle(kind, {"r0": r_in}, times, max_step=step).values
    outer = oracle(kind, {"r0": r_out}, times, max_step=step).values
    return outer - inner


def run_scenario(cfg: ScenarioConfig, outdir=None) -> ScenarioResult:
    """Evolve X, Y (and the midsurface when enabled) and evaluate every check.

    The exit code of the result depends only on the reported values.
    """
    grid = cfg.build_grid()
    metric = cfg.build_metric(grid)
    X, Y = cfg.build_sets(grid)
    h = grid.h
    times = cfg.record_times()
    params = FlowParams(t_end=cfg.flow_t_end, cfl=cfg.flow_cfl, reinit_every=cfg.flow_reinit_every)
    checks, details = {}, {}

    trajX = evolve(X, metric, params, times)
    trajY = evolve(Y, metric, params, times)
    report = avoidance.avoidance_report(trajX, trajY, metric, tolerance=cfg.tolerance())
    n = len(report.times)
    D0 = float(report.D[0])
    details["D0"] = D0
    if cfg.report_expect == EXPECT_UNMET:
        checks["hypothesis_unmet"] = report.status == avoidance.HYPOTHESIS_UNMET
    else:
        checks["avoidance"] = report.status == avoidance.PASS

    dXM = dMY = np.full(len(times), np.nan)
    trajM = None
    if cfg.interp_enable and report.status != avoidance.HYPOTHESIS_UNMET:
        dX0, dY0 = eikonal_distance(X, metric), eikonal_distance(Y, metric)
        h_metric = h * float(metric.speed.max())
        rho = 0.5 * D0 - cfg.interp_k * h_metric
        hf = harmonic_interpolant(offset_region(dX0, dY0, rho), metric)
        c = select_regular_value(hf)
        ms = extract_midsurface(hf, c, metric=metric)
        c1 = uniform_c1_check(ms, dX0, dY0, 5 * h)
        details.update(rho=rho, level=c, residual=hf.residual, c1_max_angle=c1.max_angle)
        trajM = evolve(ms.region, metric, params, times)
        m = min(n, len(trajM))
        dXM = _pad([set_distance(trajX.states[k], trajM.states[k], metric) for k in range(m)], len(times))
        dMY = _pad([set_distance(trajY.states[k], trajM.states[k], metric) for k in range(m)], len(times))
        gap = report.D[:m] - (dXM[:m] + dMY[:m] - 4 * h)
        checks["midsurface_between"] = bool(np.all(gap >= 0))
        details["midsurface_min_gap"] = float(gap.min())

    if cfg.case2_enable:
        c2 = D0 - cfg.case2_r
        tube = offset_flow(trajX, c2, cfg.case2_lambda, metric)
        Dt = avoidance.distance_series(tube, trajY, metric)
        expect = Dt + c2 * np.exp(cfg.case2_lambda * tube.times[:len(Dt)])
        live = Dt > 0
        ident_err = float(np.max(np.abs(expect - report.D[:len(Dt)])[live])) if live.any() else 0.0
        weighted = np.exp(-cfg.case2_lambda * report.times) * report.D
        checks["case2_identity"] = ident_err <= 2 * h
        checks["case2_bound"] = bool(np.all(weighted >= D0 - report.tolerance))
        details.update(case2_c=c2, case2_identity_err=ident_err)

    if cfg.check_oracle != "none":
        ref = _oracle_distance(cfg, report.times, trajX.dt)
        ok = np.isfinite(ref)
        rel = np.abs(report.D[ok] - ref[ok]) / ref[ok]
        details["oracle_rel_err"] = float(rel.max()) if rel.size else 0.0
        checks["oracle"] = bool(rel.size) and details["oracle_rel_err"] <= cfg.check_rel_tol

    rows = []
    for k, t in enumerate(times):
        if k < n:
            d, w = report.D[k], report.weighted[k]
            if report.status == avoidance.HYPOTHESIS_UNMET:
                status = "hypothesis_unmet"
            elif k and w < report.weighted[k - 1] - report.tolerance:
                status = "violation"
            else:
                status = "ok"
        else:
            d, w, status = np.inf, np.inf, "extinct"
        rows.append((fmt(t), fmt(d), fmt(dXM[k]), fmt(dMY[k]), fmt(w), status))

    result = ScenarioResult(cfg.name, checks, rows, report, None, details)
    if outdir is not None:
        result.outdir = write_outputs(cfg, result, (trajX, trajY, trajM), outdir)
    return result


def write_outputs(cfg: ScenarioConfig, result: ScenarioResult, trajs, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / cfg.output_csv, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(result.rows)
    if cfg.output_svg_every > 0:
        grid = cfg.build_grid()
        for k in range(0, len(result.rows), cfg.output_svg_every):
            regions = [tr.states[k] if tr is not None and k < len(tr) else None for tr in trajs]
            render_svg(regions, grid, outdir / f"snapshot_{k:03d}.svg")
    return outdir


def run_file(path, outroot=None, **overrides) -> ScenarioResult:
    path = Path(path)
    cfg = apply_overrides(load_config(path.read_text()), **overrides)
    outdir = None if outroot is None else Path(outroot) / cfg.name
    return run_scenario(cfg, outdir)


def worker_count(n_jobs: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap:
        limit = max(1, int(cap))
    return max(1, min(limit, n_jobs))


def _run_one(args):
    path, outroot, overrides = args
    try:
        res = run_file(path, outroot, **overrides)
        return str(path), res.exit_code, res.summary()
    except Exception as exc:  # reported per scenario, the suite keeps going
        return str(path), 2, f"{Path(path).stem}: error: {type(exc).__name__}: {exc}"


def run_suite(directory, outroot=None, **overrides) -> list[tuple[str, int, str]]:
    """Run every *.yaml scenario in ``directory`` in worker processes."""
    files = sorted(Path(directory).glob("*.yaml"))
    jobs = [(f, outroot, overrides) for f in files]
    workers = worker_count(len(jobs))
    if workers == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
