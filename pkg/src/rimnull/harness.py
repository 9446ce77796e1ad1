"""Scenario configuration, experiment runs and CSV/SVG output."""
from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import solvers
from .errors import ConfigError, RimNullError
from .geometry import FeedModel, build_reflector
from .pofield import SENTINEL_DBI, RimReflector, gain_dbi, gain_linear
from .svgplot import line_chart

log = logging.getLogger(__name__)

METHODS = ("optimal", "lsq", "gp", "sa", "serial")


@dataclass
class Scenario:
    # reflector
    diameter: float = 18.0
    frequency: float = 1.5e9
    rim_depth: float = 0.5
    plate_side_factor: float = 0.5
    feed_exponent: float = 1.0
    edge_illumination_db: float = -11.0
    # solvers
    method: list = field(default_factory=lambda: ["gp"])
    gamma: float = 0.5
    tol: float = 1e-12
    max_iters: int = 20000
    M: int = 4
    T: int = 0
    seed: int = 0
    delta: float = solvers.DEFAULT_DELTA
    # angles in degrees
    nulls: list = field(default_factory=lambda: [1.25])
    mainlobe_constraint: bool = False
    sweep_start: float = 1.0
    sweep_stop: float = 3.0
    sweep_step: float = 0.05
    pattern_start: float = -5.0
    pattern_stop: float = 5.0
    pattern_step: float = 0.02
    out: str = "out"
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        for a in self.nulls:
            if not 0.0 < a < 90.0:
                raise ConfigError(f"null angle {a} deg outside (0, 90)")
        if not 0.0 < self.sweep_start <= self.sweep_stop < 90.0:
            raise ConfigError("sweep range must satisfy 0 < start <= stop < 90 deg")
        if self.sweep_step <= 0 or self.pattern_step <= 0:
            raise ConfigError("sweep and pattern steps must be positive")
        if self.pattern_stop <= self.pattern_start:
            raise ConfigError("pattern_stop must exceed pattern_start")
        for m in self.method:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if self.M < 2:
            raise ConfigError("M must be >= 2")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError("gamma must lie in (0, 1)")

    def sweep_angles(self):
        n = int(round((self.sweep_stop - self.sweep_start) / self.sweep_step))
        return np.round(self.sweep_start + self.sweep_step * np.arange(n + 1), 10)

    def pattern_angles(self):
        n = int(round((self.pattern_stop - self.pattern_start) / self.pattern_step))
        return np.round(self.pattern_start + self.pattern_step * np.arange(n + 1), 10)


def _parse_value(name, text, default):
    text = text.strip()
    if isinstance(default, bool):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    if isinstance(default, list):
        items = [t for t in text.replace(" ", ",").split(",") if t]
        if name == "method":
            return items
        try:
            return [float(t) for t in items]
        except ValueError:
            raise ConfigError(f"{name}: expected a list of numbers, got {text!r}") from None
    try:
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r}") from None
    return text


def apply_overrides(scenario, pairs):
    """Return a copy with ``{key: text}`` overrides applied; unknown keys are errors."""
    defaults = {f.name: getattr(scenario, f.name) for f in dataclasses.fields(scenario)}
    values = dict(defaults)
    for key, text in pairs.items():
        key = key.strip().replace("-", "_")
        if key not in defaults:
            raise ConfigError(f"unknown configuration key {key!r}")
        values[key] = _parse_value(key, str(text), defaults[key])
    return Scenario(**values)


def parse_config(text):
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def load_scenario(path=None, overrides=None):
    pairs = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            pairs.update(parse_config(fh.read()))
    pairs.update(overrides or {})
    return apply_overrides(Scenario(), pairs)


def dump_scenario(scenario):
    lines = []
    for f in dataclasses.fields(scenario):
        v = getattr(scenario, f.name)
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        elif isinstance(v, bool):
            v = str(v).lower()
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


_SYSTEM_CACHE = {}


def build_system(scenario):
    """RimReflector for the scenario's dish (cached per geometry)."""
    key = (scenario.diameter, scenario.frequency, scenario.rim_depth, scenario.plate_side_factor,
           scenario.feed_exponent, scenario.edge_illumination_db)
    if key not in _SYSTEM_CACHE:
        model, segments = build_reflector(scenario.diameter, scenario.frequency, scenario.feed_exponent,
                                          scenario.edge_illumination_db, scenario.rim_depth,
                                          scenario.plate_side_factor)
        _SYSTEM_CACHE[key] = RimReflector(model, FeedModel.normalized(scenario.feed_exponent), segments)
    return _SYSTEM_CACHE[key]


def fmt(x):
    """Fixed-width text for CSV: finite floats only, sentinel below the floor."""
    x = float(x)
    if not math.isfinite(x):
        return f"{SENTINEL_DBI:.6f}"
    return f"{x:.6f}"


def solve(system, scenario, method, null_angles_deg, mainlobe=None):
    """Run one solver; returns a SolverReport (closed forms get a one-entry history)."""
    mainlobe = scenario.mainlobe_constraint if mainlobe is None else mainlobe
    psis = np.radians(np.atleast_1d(null_angles_deg))
    C = solvers.build_constraints(system, psis, mainlobe=mainlobe, delta=scenario.delta)
    if method in ("optimal", "lsq"):
        if method == "optimal" and C.n_rows == 1:
            w = solvers.optimal_single(C.A[0], -C.y[0])
        else:
            w = solvers.min_norm_multi(C)
        c = solvers.cost(C, w.values)
        return solvers.SolverReport(weights=w, cost=c, cost_history=np.array([c]), iterations=0,
                                    converged=True, method=method)
    if method == "gp":
        return solvers.gradient_projection(C, gamma=scenario.gamma, max_iters=scenario.max_iters,
                                           tol=scenario.tol, seed=scenario.seed)
    if method == "sa":
        return solvers.simulated_annealing(C, M=scenario.M, T=scenario.T or None, seed=scenario.seed)
    if method == "serial":
        return solvers.serial_search(C)
    raise ConfigError(f"unknown method {method!r}")


def method_label(scenario, method):
    return f"sa{scenario.M}" if method == "sa" else method


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)


def write_weights(path, weights, segments):
    """Weight records: segment, ring, phase (rad), real, imag; alphabet in a comment line."""
    w = np.asarray(weights.values)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# alphabet={weights.label}\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["segment", "ring", "phase_rad", "real", "imag"])
        for n, (v, ring) in enumerate(zip(w, segments.ring_index)):
            wr.writerow([n, int(ring), f"{np.angle(v):.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_weights(path):
    with open(path, encoding="utf-8") as fh:
        meta = fh.readline().strip()
        rows = list(csv.DictReader(fh))
    label = meta.split("=", 1)[1]
    values = np.array([complex(float(r["real"]), float(r["imag"])) for r in rows])
    kind = solvers.UNCONSTRAINED if label == "continuous" else int(label)
    if label == "continuous" and np.all(np.abs(np.abs(values) - 1) <= 1e-12):
        kind = solvers.UNIT_MODULUS
    return solvers.WeightVector(values, kind), np.array([int(r["ring"]) for r in rows])


def write_pattern(path, cut):
    _write_csv(path, ["psi_deg", "copol_dBi", "crosspol_dBi"],
               [(f"{psi:.6f}", fmt(g), fmt(x)) for psi, g, x in cut.rows()])


def calibrate(scenario, check_quadrature=True):
    """Derived geometry and the gain/efficiency anchors as a dict."""
    system = build_system(scenario)
    m = system.model
    full_co, _ = system.full_dish_field(0.0)
    g_full = gain_linear(full_co)
    rep = {
        "focal_ratio": m.focal_ratio,
        "focal_length_m": m.focal_length,
        "theta0_deg": math.degrees(m.rim_edge_angle),
        "theta1_deg": math.degrees(m.rim_start_angle),
        "wavelength_m": m.wavelength,
        "segments": system.n_segments,
        "rings": system.segments.n_rings,
        "plate_side_m": system.segments.plate_side,
        "edge_illumination_db": m.edge_illumination_db(),
        "boresight_gain_dbi": float(10 * np.log10(g_full)),
        "uniform_weight_gain_dbi": gain_dbi(system.uniform_reference()),
        "fixed_only_gain_dbi": gain_dbi(system.fixed_field(0.0).co),
        "ideal_gain_dbi": float(10 * np.log10(system.ideal_gain())),
        "aperture_efficiency": float(g_full / system.ideal_gain()),
    }
    if check_quadrature:
        rep["quadrature_change"] = system.check_quadrature(np.radians([0.0, 1.0, 2.0, 3.0]))
    return rep


def run_pattern(scenario):
    """Fixed-dish cut plus one cut per method; CSV, weight files and an SVG."""
    os.makedirs(scenario.out, exist_ok=True)
    system = build_system(scenario)
    angles = np.radians(scenario.pattern_angles())
    ones = np.ones(system.n_segments)
    fixed = system.total_pattern(ones, angles)
    paths = [os.path.join(scenario.out, "pattern_fixed.csv")]
    write_pattern(paths[0], fixed)
    series = [("fixed dish", np.degrees(angles), fixed.co_dbi)]
    results = {}
    for method in scenario.method:
        try:
            rep = solve(system, scenario, method, scenario.nulls)
        except RimNullError as exc:
            raise RimNullError(f"{method} solve for nulls {scenario.nulls} failed: {exc}") from exc
        label = method_label(scenario, method)
        cut = system.total_pattern(rep.weights.values, angles)
        p = os.path.join(scenario.out, f"pattern_{label}.csv")
        write_pattern(p, cut)
        wp = os.path.join(scenario.out, f"weights_{label}.csv")
        write_weights(wp, rep.weights, system.segments)
        paths += [p, wp]
        series.append((f"{label} co-pol", np.degrees(angles), cut.co_dbi))
        series.append((f"{label} cross-pol", np.degrees(angles), cut.cross_dbi))
        results[label] = (rep, cut)
    svg = os.path.join(scenario.out, "pattern.svg")
    line_chart(svg, series, xlabel="psi (deg)", ylabel="gain (dBi)",
               title=f"Co/cross-pol cut, nulls at {', '.join(f'{a:g}' for a in scenario.nulls)} deg",
               ylim=(-60.0, 55.0))
    paths.append(svg)
    return paths, results


SWEEP_HEADER = ["psi_deg", "method", "null_dBi", "mainlobe_dBi", "cost", "iters", "seed"]


def _sweep_point(system, scenario, method, psi_deg, reference):
    rep = solve(system, scenario, method, [psi_deg])
    w = rep.weights.values
    null = gain_dbi(system.field(w, np.radians(psi_deg))[0], reference)
    main = gain_dbi(system.field(w, 0.0)[0], reference)
    return dict(psi_deg=psi_deg, method=method_label(scenario, method), null_dBi=null, mainlobe_dBi=main,
                cost=rep.cost, iters=rep.iterations, seed=rep.seed if rep.seed is not None else "")


def null_sweep(scenario, methods=None):
    """Per-angle records for each method; failed points are returned separately."""
    system = build_system(scenario)
    reference = system.uniform_reference()
    angles = scenario.sweep_angles()
    system.fixed_field(0.0)
    jobs = [(m, float(a)) for m in (methods or scenario.method) for a in angles]

    def work(job):
        m, a = job
        try:
            return _sweep_point(system, scenario, m, a, reference), None
        except RimNullError as exc:
            log.warning("sweep point %s at %.3f deg failed: %s", m, a, exc)
            return None, (m, a, str(exc))

    if scenario.workers > 1:
        with ThreadPoolExecutor(max_workers=scenario.workers) as pool:
            out = list(pool.map(work, jobs))
    else:
        out = [work(j) for j in jobs]
    records = [r for r, _ in out if r is not None]
    failures = [f for _, f in out if f is not None]
    records.sort(key=lambda r: (r["psi_deg"], r["method"]))
    return records, failures


def run_null_sweep(scenario):
    os.makedirs(scenario.out, exist_ok=True)
    records, failures = null_sweep(scenario)
    path = os.path.join(scenario.out, "sweep.csv")
    _write_csv(path, SWEEP_HEADER,
               [(f"{r['psi_deg']:.6f}", r["method"], fmt(r["null_dBi"]), fmt(r["mainlobe_dBi"]),
                 f"{r['cost']:.10e}", r["iters"], r["seed"]) for r in records])
    paths = [path]
    if failures:
        fp = os.path.join(scenario.out, "sweep_failures.csv")
        _write_csv(fp, ["method", "psi_deg", "error"], [(m, f"{a:.6f}", e) for m, a, e in failures])
        paths.append(fp)
    labels = sorted({r["method"] for r in records})
    for key, name, ylabel in [("null_dBi", "sweep_null.svg", "G(psi) (dBi)"),
                              ("mainlobe_dBi", "sweep_mainlobe.svg", "G(0) (dBi)")]:
        series = []
        for lab in labels:
            rs = [r for r in records if r["method"] == lab]
            series.append((lab, [r["psi_deg"] for r in rs], [r[key] for r in rs]))
        if series:
            p = os.path.join(scenario.out, name)
            line_chart(p, series, xlabel="null angle psi (deg)", ylabel=ylabel,
                       title="Gain when placing a null at psi")
            paths.append(p)
    return paths, records
