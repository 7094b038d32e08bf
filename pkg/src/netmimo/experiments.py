"""Named experiment sweeps with CSV and JSON manifest output.

Every curve becomes one CSV with the columns in :data:`CSV_COLUMNS`. The
manifest records every input needed to rerun the experiment, plus a SHA-256
of each emitted file.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, montecarlo
from .config import SystemConfig
from .errors import DegenerateChannelError, NumericalFailure, ParameterError

CSV_COLUMNS = ("curve", "axis_name", "axis", "value", "ci", "method", "seed", "config_digest", "status")
EXPERIMENTS = (
    "fig2-eta-cluster-sweep",
    "fig3-eta-sweep",
    "fig-scheduling-rzf",
    "fig4-cluster-scaling",
    "fig5-isolated-comparison",
    "cdf-user-rates",
    "validate",
)
METHOD_CHOICES = ("analytic", "montecarlo", "both")
MANIFEST_NAME = "manifest.json"
_ETA_GRID = [round(0.05 * i, 2) for i in range(1, 21)]

DEFAULT_AXES = {
    "fig2-eta-cluster-sweep": {"eta": [0.2, 0.4, 0.6, 0.8, 1.0], "avg_cluster_size": [1, 2, 4, 6, 8, 10]},
    "fig3-eta-sweep": {"eta": _ETA_GRID, "avg_cluster_size": [4, 6]},
    "fig-scheduling-rzf": {"eta": [0.2, 0.4, 0.6, 0.8, 1.0], "avg_cluster_size": [2]},
    "fig4-cluster-scaling": {"eta": [0.6], "avg_cluster_size": [1, 2, 4, 6, 8, 10]},
    "fig5-isolated-comparison": {"eta": [0.6], "avg_cluster_size": [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000]},
    "cdf-user-rates": {"eta": [0.6], "avg_cluster_size": [4, 16]},
    "validate": {},
}
DEFAULT_METHOD = {
    "fig2-eta-cluster-sweep": "analytic",
    "fig3-eta-sweep": "analytic",
    "fig-scheduling-rzf": "montecarlo",
    "fig4-cluster-scaling": "both",
    "fig5-isolated-comparison": "analytic",
    "cdf-user-rates": "montecarlo",
    "validate": "both",
}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    method: str
    axes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ParameterError(f"unknown experiment {self.name!r}; choose from {EXPERIMENTS}")
        if self.method not in METHOD_CHOICES:
            raise ParameterError(f"method must be one of {METHOD_CHOICES}")
        for eta in self.axes.get("eta", []):
            if not 0 < eta <= 1:
                raise ParameterError(f"eta axis value {eta} outside (0, 1]")
        for b in self.axes.get("avg_cluster_size", []):
            if not b >= 1:
                raise ParameterError(f"cluster size axis value {b} below 1")

    @classmethod
    def default(cls, name: str, method: str | None = None, **overrides):
        axes = {k: list(v) for k, v in DEFAULT_AXES.get(name, {}).items()}
        axes.update({k: list(v) for k, v in overrides.items() if v is not None})
        return cls(name, method or DEFAULT_METHOD.get(name, "analytic"), axes)


@dataclass
class Curve:
    name: str
    axis_name: str
    method: str
    rows: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, axis, value, ci=0.0, status="ok"):
        self.rows.append((axis, value, ci, status))


@dataclass
class RunSettings:
    seed: int = 0
    topologies: int = 200
    fading: int = 20
    quad_tol: float = 1e-4
    workers: int = 1

    def quad(self) -> analytic.QuadratureSpec:
        return analytic.QuadratureSpec(rate_rel_tol=self.quad_tol)


_POINT_ERRORS = (ParameterError, NumericalFailure, DegenerateChannelError, ArithmeticError)


def _point(curve: Curve, axis, fn):
    """Evaluate one point; failures become error rows instead of vanishing."""
    try:
        value, ci = fn()
        curve.add(axis, value, ci)
    except _POINT_ERRORS as exc:
        curve.add(axis, float("nan"), float("nan"), f"error: {type(exc).__name__}: {exc}")


def _analytic_point(config, eta, b, settings, interference=True):
    p = analytic.AnalyticParams.from_config(config, eta, b)
    return analytic.per_bs_ergodic_sum_rate(p, settings.quad(), interference=interference).value, 0.0


def _mc_point(config, settings, curve: Curve | None = None, **plan_kw):
    plan = montecarlo.SimPlan(n_topologies=settings.topologies, n_fading_per_topology=settings.fading,
                              seed=settings.seed, **plan_kw)
    res = montecarlo.run(plan, config, workers=settings.workers)
    if curve is not None:
        curve.info.setdefault("redraws", []).append(res.n_redraws)
    return res.per_bs_rate, res.ci95


def _methods(method: str):
    return ("analytic", "montecarlo") if method == "both" else (method,)


def _fig2(spec, config, settings):
    curves = []
    for m in _methods(spec.method):
        for eta in spec.axes["eta"]:
            c = Curve(f"eta={eta:g}/{m}", "avg_cluster_size", m)
            for b in spec.axes["avg_cluster_size"]:
                if m == "analytic":
                    _point(c, b, lambda: _analytic_point(config, eta, b, settings))
                else:
                    _point(c, b, lambda: _mc_point(config, settings, c, eta=eta, avg_cluster_size=b))
            curves.append(c)
    return curves


def _fig3(spec, config, settings):
    curves = []
    for m in _methods(spec.method):
        for b in spec.axes["avg_cluster_size"]:
            c = Curve(f"Bbar={b:g}/{m}", "eta", m)
            for eta in spec.axes["eta"]:
                if m == "analytic":
                    _point(c, eta, lambda: _analytic_point(config, eta, b, settings))
                else:
                    _point(c, eta, lambda: _mc_point(config, settings, c, eta=eta, avg_cluster_size=b))
            curves.append(c)
    return curves


def _rzf(spec, config, settings):
    curves = []
    for b in spec.axes["avg_cluster_size"]:
        if spec.method in ("analytic", "both"):
            c = Curve(f"Bbar={b:g}/zf/analytic", "eta", "analytic")
            for eta in spec.axes["eta"]:
                _point(c, eta, lambda: _analytic_point(config, eta, b, settings))
            curves.append(c)
        if spec.method in ("montecarlo", "both"):
            for bf in ("zf", "rzf"):
                c = Curve(f"Bbar={b:g}/{bf}/montecarlo", "eta", "montecarlo")
                for eta in spec.axes["eta"]:
                    _point(c, eta, lambda: _mc_point(config, settings, c, eta=eta, avg_cluster_size=b, beamformer=bf))
                curves.append(c)
    return curves


def _fig4(spec, config, settings):
    curves = []
    eta = spec.axes["eta"][0]
    sizes = spec.axes["avg_cluster_size"]
    if spec.method in ("analytic", "both"):
        c = Curve(f"poisson/location/eta={eta:g}/analytic", "avg_cluster_size", "analytic")
        for b in sizes:
            _point(c, b, lambda: _analytic_point(config, eta, b, settings))
        curves.append(c)
    if spec.method in ("montecarlo", "both"):
        for model in ("poisson", "fixed-per-cluster"):
            for assoc in ("location-based", "channel-based"):
                c = Curve(f"{model}/{assoc.split('-')[0]}/eta={eta:g}/montecarlo", "avg_cluster_size", "montecarlo")
                for b in sizes:
                    _point(c, b, lambda: _mc_point(config, settings, c, eta=eta, avg_cluster_size=b,
                                                   bs_count_model=model, association=assoc))
                curves.append(c)
        c = Curve(f"single-cell/eta={eta:g}/montecarlo", "avg_cluster_size", "montecarlo")
        ref = max(sizes)
        _point(c, ref, lambda: _mc_point(config, settings, c, eta=eta, avg_cluster_size=ref,
                                         scenario="single-cell-processing"))
        curves.append(c)
    return curves


def _fig5(spec, config, settings):
    curves = []
    eta = spec.axes["eta"][0]
    sizes = spec.axes["avg_cluster_size"]
    if spec.method in ("analytic", "both"):
        clustered = Curve(f"clustered/eta={eta:g}/analytic", "avg_cluster_size", "analytic")
        isolated = Curve(f"isolated-cluster/eta={eta:g}/analytic", "avg_cluster_size", "analytic")
        cell = Curve(f"isolated-cell/eta={eta:g}/analytic", "avg_cluster_size", "analytic")
        cell_rate = analytic.isolated_cell_rate(config, eta)
        for b in sizes:
            _point(clustered, b, lambda: _analytic_point(config, eta, b, settings))
            _point(isolated, b, lambda: _analytic_point(config, eta, b, settings, interference=False))
            cell.add(b, cell_rate, 0.0)
        curves += [clustered, isolated, cell]
    if spec.method in ("montecarlo", "both"):
        small = [b for b in sizes if b <= 10]
        for scen in ("full-network", "isolated-cluster"):
            c = Curve(f"{'clustered' if scen == 'full-network' else scen}/eta={eta:g}/montecarlo",
                      "avg_cluster_size", "montecarlo")
            for b in small:
                _point(c, b, lambda: _mc_point(config, settings, c, eta=eta, avg_cluster_size=b, scenario=scen))
            curves.append(c)
        c = Curve(f"isolated-cell/eta={eta:g}/montecarlo", "avg_cluster_size", "montecarlo")
        _point(c, 1, lambda: _mc_point(config, settings, c, eta=eta, scenario="isolated-cell"))
        curves.append(c)
    return curves


def _cdf(spec, config, settings):
    if spec.method == "analytic":
        raise ParameterError("cdf-user-rates is simulation only")
    eta = spec.axes["eta"][0]
    curves = []
    cases = [("single-cell", dict(scenario="single-cell-processing", avg_cluster_size=max(spec.axes["avg_cluster_size"])))]
    cases += [(f"Bbar={b:g}", dict(avg_cluster_size=b, association="channel-based")) for b in spec.axes["avg_cluster_size"]]
    for label, kw in cases:
        c = Curve(f"{label}/eta={eta:g}/montecarlo", "user_rate", "montecarlo")
        try:
            plan = montecarlo.SimPlan(n_topologies=settings.topologies, n_fading_per_topology=settings.fading,
                                      seed=settings.seed, eta=eta, **kw)
            rates, cdf = montecarlo.user_rate_cdf(plan, config, workers=settings.workers)
            for r, f in zip(rates, cdf):
                c.add(float(r), float(f), 0.0)
            c.info["median"] = float(np.median(rates)) if len(rates) else float("nan")
        except _POINT_ERRORS as exc:
            c.add(float("nan"), float("nan"), float("nan"), f"error: {type(exc).__name__}: {exc}")
        curves.append(c)
    return curves


def _validate(spec, config, settings):
    from . import validation

    curves = []
    for check in validation.run_checks(config, settings, include_montecarlo=spec.method != "analytic"):
        c = Curve(f"validate/{check.name}", "case", "analytic" if check.kind == "analytic" else "montecarlo")
        c.add(0, check.value, check.threshold, "pass" if check.passed else f"fail: {check.detail}")
        curves.append(c)
    return curves


_RUNNERS = {
    "fig2-eta-cluster-sweep": _fig2,
    "fig3-eta-sweep": _fig3,
    "fig-scheduling-rzf": _rzf,
    "fig4-cluster-scaling": _fig4,
    "fig5-isolated-comparison": _fig5,
    "cdf-user-rates": _cdf,
    "validate": _validate,
}


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.=_-]+", "_", text).strip("_")


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_curves(curves, out_dir: Path, experiment: str, settings: RunSettings, config: SystemConfig):
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config.digest()
    files = []
    for c in curves:
        path = out_dir / f"{experiment}__{_slug(c.name)}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for axis, value, ci, status in c.rows:
                w.writerow([c.name, c.axis_name, _fmt(axis), _fmt(float(value)), _fmt(float(ci)),
                            c.method, settings.seed, digest, status])
        files.append(path)
    return files


def run_experiment(spec: ExperimentSpec, config: SystemConfig, settings: RunSettings, out_dir) -> dict:
    """Run ``spec`` and write its CSVs and manifest into ``out_dir``; return the manifest."""
    out_dir = Path(out_dir)
    curves = _RUNNERS[spec.name](spec, config, settings)
    files = write_curves(curves, out_dir, spec.name, settings, config)
    manifest = {
        "experiment": spec.name,
        "method": spec.method,
        "axes": spec.axes,
        "seed": settings.seed,
        "topologies": settings.topologies,
        "fading": settings.fading,
        "quad_tol": settings.quad_tol,
        "config": config.to_dict(),
        "config_digest": config.digest(),
        "quadrature": settings.quad().to_dict(),
        "files": {p.name: _sha256(p) for p in files},
        "curve_info": {c.name: c.info for c in curves if c.info},
        "failures": sum(1 for c in curves for r in c.rows if r[3] not in ("ok", "pass")),
    }
    (out_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def load_manifest(path):
    """Rebuild ``(spec, config, settings)`` from a manifest file."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    spec = ExperimentSpec(data["experiment"], data["method"], data["axes"])
    config = SystemConfig.from_dict(data["config"])
    settings = RunSettings(seed=data["seed"], topologies=data["topologies"], fading=data["fading"],
                           quad_tol=data["quad_tol"])
    return spec, config, settings
