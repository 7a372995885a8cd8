"""Scenario configuration: a flat YAML mapping with dotted key names.

Example::

    name: euclid_concentric
    grid.n: 256
    grid.bounds: [-1, 1, -1, 1]
    metric.kind: euclidean
    flow.t_end: 0.04
    shapes.x: ["circle 0 0 0.3"]
    shapes.y: ["not circle 0 0 0.8"]

Shape strings: ``circle cx cy r``, ``halfplane a b c`` (ax + by <= c),
``graph_band A`` (|y| <= A/(1+x^2)), ``point cx cy``, ``geodesic_circle r``
(Poincare disk, centred at the origin, hyperbolic radius r) and
``expr <expression in x, y>`` (region where the expression is <= 0). A
leading ``not`` takes the complement; several shapes form a union.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import yaml

from .distance import RegionSet, set_distance
from .errors import DomainOutsideChart, ParseError, ValidationError
from .grid import METRIC_KINDS, POINCARE_DISK, Grid, MetricSpec, eval_expression, make_metric

EXPECT_AVOID = "avoid"
EXPECT_UNMET = "hypothesis_unmet"
ORACLE_CHECKS = ("none", "euclid_concentric", "hyperbolic_concentric")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    grid_n: int = 256
    grid_bounds: tuple = (-1.0, 1.0, -1.0, 1.0)
    metric_kind: str = "euclidean"
    metric_phi: str | None = None
    flow_t_end: float = 0.04
    flow_cfl: float = 0.4
    flow_records: int = 9
    flow_reinit_every: int | None = None
    shapes_x: tuple = ()
    shapes_y: tuple = ()
    interp_enable: bool = False
    interp_k: int = 3
    case2_enable: bool = False
    case2_r: float = 0.0
    case2_lambda: float = -1.0
    report_tolerance: float | str = "auto"
    report_expect: str = EXPECT_AVOID
    check_oracle: str = "none"
    check_radii: tuple = ()
    check_rel_tol: float = 0.03
    output_csv: str = "report.csv"
    output_svg_every: int = 0

    def record_times(self) -> np.ndarray:
        return np.linspace(0.0, self.flow_t_end, self.flow_records)

    def tolerance(self) -> float | None:
        return None if self.report_tolerance == "auto" else float(self.report_tolerance)

    def build_grid(self) -> Grid:
        xmin, xmax, ymin, ymax = self.grid_bounds
        span = max(xmax - xmin, ymax - ymin)
        nx = int(round((xmax - xmin) / span * (self.grid_n - 1))) + 1
        ny = int(round((ymax - ymin) / span * (self.grid_n - 1))) + 1
        return Grid(nx, ny, xmin, xmax, ymin, ymax)

    def build_metric(self, grid: Grid | None = None) -> MetricSpec:
        return make_metric(self.metric_kind, grid or self.build_grid(), self.metric_phi)

    def build_sets(self, grid: Grid | None = None) -> tuple[RegionSet, RegionSet]:
        grid = grid or self.build_grid()
        return build_region(grid, self.shapes_x), build_region(grid, self.shapes_y)


# key name in the file -> (field name, converter)
_KEYS = {
    "name": ("name", str),
    "grid.n": ("grid_n", int),
    "grid.bounds": ("grid_bounds", lambda v: tuple(float(x) for x in v)),
    "metric.kind": ("metric_kind", lambda v: str(v).lower()),
    "metric.phi": ("metric_phi", lambda v: None if v is None else str(v)),
    "flow.t_end": ("flow_t_end", float),
    "flow.cfl": ("flow_cfl", float),
    "flow.records": ("flow_records", int),
    "flow.reinit_every": ("flow_reinit_every", lambda v: None if v is None else int(v)),
    "shapes.x": ("shapes_x", lambda v: tuple(str(s) for s in v)),
    "shapes.y": ("shapes_y", lambda v: tuple(str(s) for s in v)),
    "interp.enable": ("interp_enable", bool),
    "interp.k": ("interp_k", int),
    "case2.enable": ("case2_enable", bool),
    "case2.r": ("case2_r", float),
    "case2.lambda": ("case2_lambda", float),
    "report.tolerance": ("report_tolerance", lambda v: "auto" if v == "auto" else float(v)),
    "report.expect": ("report_expect", str),
    "check.oracle": ("check_oracle", str),
    "check.radii": ("check_radii", lambda v: tuple(float(x) for x in v)),
    "check.rel_tol": ("check_rel_tol", float),
    "output.csv": ("output_csv", str),
    "output.svg_every": ("output_svg_every", int),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}


def load_config(text: str, validate_geometry: bool = True) -> ScenarioConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ParseError(str(exc.problem or exc), line) from exc
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ParseError("top level must be a key: value mapping", 1)
    values = {}
    for key, value in raw.items():
        if key not in _KEYS:
            raise ValidationError(str(key), "unknown key")
        name, conv = _KEYS[key]
        try:
            values[name] = conv(value)
        except (TypeError, ValueError) as exc:
            raise ValidationError(key, f"bad value {value!r}: {exc}") from exc
    cfg = ScenarioConfig(**values)
    validate(cfg, geometry=validate_geometry)
    return cfg


def validate(cfg: ScenarioConfig, geometry: bool = True) -> None:
    if cfg.grid_n < 16:
        raise ValidationError("grid.n", "needs at least 16 nodes")
    if len(cfg.grid_bounds) != 4:
        raise ValidationError("grid.bounds", "expected [xmin, xmax, ymin, ymax]")
    if cfg.metric_kind not in METRIC_KINDS:
        raise ValidationError("metric.kind", f"must be one of {METRIC_KINDS}")
    if cfg.metric_kind == "custom_conformal" and not cfg.metric_phi:
        raise ValidationError("metric.phi", "required for custom_conformal")
    if cfg.flow_t_end <= 0:
        raise ValidationError("flow.t_end", "must be positive")
    if not 0 < cfg.flow_cfl <= 1:
        raise ValidationError("flow.cfl", "must lie in (0, 1]")
    if cfg.flow_records < 2:
        raise ValidationError("flow.records", "need at least two record times")
    if not cfg.shapes_x:
        raise ValidationError("shapes.x", "at least one shape required")
    if not cfg.shapes_y:
        raise ValidationError("shapes.y", "at least one shape required")
    if cfg.interp_k < 1:
        raise ValidationError("interp.k", "must be a positive integer")
    if cfg.report_expect not in (EXPECT_AVOID, EXPECT_UNMET):
        raise ValidationError("report.expect", f"must be {EXPECT_AVOID!r} or {EXPECT_UNMET!r}")
    if cfg.check_oracle not in ORACLE_CHECKS:
        raise ValidationError("check.oracle", f"must be one of {ORACLE_CHECKS}")
    if cfg.check_oracle != "none" and len(cfg.check_radii) != 2:
        raise ValidationError("check.radii", "need inner and outer radius")
    if cfg.output_svg_every < 0:
        raise ValidationError("output.svg_every", "must be >= 0")
    if not geometry:
        return
    try:
        grid = cfg.build_grid()
    except ValueError as exc:
        raise ValidationError("grid.bounds", str(exc)) from exc
    try:
        metric = cfg.build_metric(grid)
    except DomainOutsideChart as exc:
        raise ValidationError("metric.kind", str(exc)) from exc
    try:
        X = build_region(grid, cfg.shapes_x)
    except ValueError as exc:
        raise ValidationError("shapes.x", str(exc)) from exc
    try:
        Y = build_region(grid, cfg.shapes_y)
    except ValueError as exc:
        raise ValidationError("shapes.y", str(exc)) from exc
    for key, region in (("shapes.x", X), ("shapes.y", Y)):
        if not region.has_interface:
            raise ValidationError(key, "shape has no boundary inside the grid")
    if cfg.report_expect != EXPECT_UNMET and set_distance(X, Y, metric) < 2 * grid.h:
        raise ValidationError("shapes.y", "X and Y overlap or touch on the grid")


def serialize(cfg: ScenarioConfig) -> str:
    out = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[_FIELD_TO_KEY[f.name]] = value
    return yaml.safe_dump(out, sort_keys=False, default_flow_style=None)


# ---------------------------------------------------------------------------
# shapes


def _shape_field(grid: Grid, spec: str):
    """Level-set function and point list of one shape string."""
    spec = spec.strip()
    negate = False
    if spec.startswith("not "):
        negate = True
        spec = spec[4:].strip()
    kind, _, rest = spec.partition(" ")
    X, Y = grid.mesh()
    points = np.zeros((0, 2))
    if kind == "expr":
        u = eval_expression(rest, X, Y)
    else:
        try:
            args = [float(a) for a in rest.split()]
        except ValueError as exc:
            raise ValueError(f"bad shape {spec!r}") from exc
        if kind == "circle" and len(args) == 3:
            cx, cy, r = args
            u = np.hypot(X - cx, Y - cy) - r
        elif kind == "geodesic_circle" and len(args) == 1:
            u = np.hypot(X, Y) - np.tanh(0.5 * args[0])
        elif kind == "halfplane" and len(args) == 3:
            a, b, c = args
            u = (a * X + b * Y - c) / np.hypot(a, b)
        elif kind == "graph_band" and len(args) == 1:
            u = np.abs(Y) - args[0] / (1.0 + X * X)
        elif kind == "point" and len(args) == 2:
            u = np.hypot(X - args[0], Y - args[1])
            points = np.array([args])
        else:
            raise ValueError(f"bad shape {spec!r}")
    if negate:
        if len(points):
            raise ValueError("points cannot be complemented")
        u = -u
    return u, points


def build_region(grid: Grid, shapes) -> RegionSet:
    """Union of the given shape strings."""
    fields, pts = [], []
    for spec in shapes:
        u, p = _shape_field(grid, spec)
        fields.append(u)
        pts.append(p)
    u = np.min(fields, axis=0)
    return RegionSet(grid, np.ascontiguousarray(u), np.vstack(pts))
