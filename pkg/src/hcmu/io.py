"""Run configurations and metric bundles as JSON; sample grids as CSV.

Complex numbers are written as {"x": re, "y": im}; the point at infinity as
{"at": "infinity"}.  Floats go through ``repr`` so a bundle re-read gives back
bit-identical parameters.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .curvature import CurvatureParams, make_params
from .errors import ConfigError, HCMUError
from .existence import ConicalMax, Cusp, ExistenceReport, Realization, SingularityPlan, realize_on_sphere
from .metric import MetricField, classify, make_metric
from .oneform import INFINITY, POLE_EVAL_TOL, PoleSpec, build_form
from .verify import QuadratureSettings, Tolerances

BUNDLE_FORMAT = "hcmu-bundle"
BUNDLE_VERSION = 1


@dataclass
class Sampling:
    xmin: float = -1.0
    xmax: float = 2.0
    ymin: float = -1.0
    ymax: float = 2.0
    nx: int = 200
    ny: int = 200


@dataclass
class RunConfig:
    plan: SingularityPlan
    A0: float | None = None
    base_point: complex | None = None
    K0: float | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    sampling: Sampling = field(default_factory=Sampling)
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    seed: int = 0


# -- small parsing helpers ----------------------------------------------------


def _get(d: dict, key: str, path: str, kind=float, default: Any = ...):
    if key not in d:
        if default is ...:
            raise ConfigError(f"missing field '{key}'", path)
        return default
    val = d[key]
    try:
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise TypeError
            return float(val)
        if kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise TypeError
            return val
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{key}' must be {kind.__name__}, got {val!r}", path) from None


def _point(d: Any, path: str) -> complex:
    if not isinstance(d, dict):
        raise ConfigError(f"expected an object with x and y, got {d!r}", path)
    return complex(_get(d, "x", path), _get(d, "y", path, default=0.0))


def _list(d: dict, key: str, path: str) -> list:
    val = d.get(key, [])
    if not isinstance(val, list):
        raise ConfigError(f"field '{key}' must be a list", path)
    return val


def point_to_json(z) -> dict:
    if z is INFINITY:
        return {"at": "infinity"}
    z = complex(z)
    return {"x": z.real, "y": z.imag}


def point_from_json(d: Any, path: str):
    if isinstance(d, dict) and d.get("at") == "infinity":
        return INFINITY
    return _point(d, path)


def load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from None


# -- plans and run configs ----------------------------------------------------


def plan_from_dict(d: Any, path: str = "plan") -> SingularityPlan:
    if not isinstance(d, dict):
        raise ConfigError("plan must be an object", path)
    genus = _get(d, "genus", path, int, default=0)
    cusps = [
        Cusp(_point(c, f"{path}.cusps[{i}]"), _get(c, "residue", f"{path}.cusps[{i}]"))
        for i, c in enumerate(_list(d, "cusps", path))
    ]
    conical = [
        ConicalMax(_point(c, f"{path}.conical_maxima[{i}]"), _get(c, "alpha", f"{path}.conical_maxima[{i}]"))
        for i, c in enumerate(_list(d, "conical_maxima", path))
    ]
    smooth = [_point(c, f"{path}.smooth_maxima[{i}]") for i, c in enumerate(_list(d, "smooth_maxima", path))]
    saddles = []
    for i, s in enumerate(_list(d, "saddles", path)):
        alpha = s.get("alpha") if isinstance(s, dict) else s
        if isinstance(alpha, bool) or not isinstance(alpha, (int, float)) or alpha != int(alpha):
            raise ConfigError(f"saddle alpha must be an integer, got {alpha!r}", f"{path}.saddles[{i}]")
        saddles.append(int(alpha))
    Lambda = _get(d, "Lambda", path, default=None)
    try:
        return SingularityPlan(genus, tuple(cusps), tuple(conical), tuple(smooth), tuple(saddles), Lambda)
    except HCMUError as exc:
        raise ConfigError(str(exc), path) from None


def plan_to_dict(plan: SingularityPlan) -> dict:
    out: dict[str, Any] = {
        "genus": plan.genus,
        "cusps": [{**point_to_json(c.location), "residue": c.residue} for c in plan.cusps],
        "conical_maxima": [{**point_to_json(c.location), "alpha": c.alpha} for c in plan.conical_maxima],
        "smooth_maxima": [point_to_json(z) for z in plan.smooth_maxima],
        "saddles": [{"alpha": a} for a in plan.saddles],
    }
    if plan.Lambda is not None:
        out["Lambda"] = plan.Lambda
    return out


def _dataclass_overrides(cls, d: Any, path: str):
    if d is None:
        return cls()
    if not isinstance(d, dict):
        raise ConfigError("must be an object", path)
    if cls is Tolerances:
        try:
            return Tolerances.from_dict(d)
        except KeyError as exc:
            raise ConfigError(f"unknown tolerance field(s): {exc.args[0]}", path) from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), path) from None
    known = cls.__dataclass_fields__
    kw = {}
    for k, v in d.items():
        if k not in known:
            raise ConfigError(f"unknown field '{k}'", path)
        kind = type(getattr(cls(), k))
        kw[k] = _get(d, k, path, int if kind is int else float)
    return cls(**kw)


def config_from_dict(d: Any) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a JSON object")
    if "plan" not in d:
        raise ConfigError("missing field 'plan'")
    plan = plan_from_dict(d["plan"])
    cfg = RunConfig(plan)
    norm = d.get("normalization")
    if norm is not None:
        if not isinstance(norm, dict):
            raise ConfigError("must be an object", "normalization")
        if "A0" in norm:
            cfg.A0 = _get(norm, "A0", "normalization")
        if "p0" in norm or "K0" in norm:
            cfg.base_point = _point(norm.get("p0"), "normalization.p0")
            cfg.K0 = _get(norm, "K0", "normalization")
    cfg.tolerances = _dataclass_overrides(Tolerances, d.get("tolerances"), "tolerances")
    cfg.sampling = _dataclass_overrides(Sampling, d.get("sampling"), "sampling")
    cfg.quadrature = _dataclass_overrides(QuadratureSettings, d.get("quadrature"), "quadrature")
    cfg.seed = _get(d, "seed", "", int, default=0)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    return config_from_dict(load_json(path))


# -- synthesis and bundles ----------------------------------------------------


def synthesize(cfg: RunConfig) -> tuple[Realization, CurvatureParams]:
    real = realize_on_sphere(cfg.plan)
    params = make_params(
        real.form, Lambda=real.report.Lambda, A0=cfg.A0, base_point=cfg.base_point, K0=cfg.K0
    )
    return real, params


def _report_to_dict(report: ExistenceReport) -> dict:
    return {
        "S": report.S,
        "Lambda": report.Lambda,
        "alpha_max": report.alpha_max,
        "feasible": report.feasible,
        "diagnostics": [{"code": d.code, "message": d.message} for d in report.diagnostics],
    }


def report_to_dict(report: ExistenceReport) -> dict:
    out = _report_to_dict(report)
    out["residues"] = [{**point_to_json(z), "residue": r, "role": role} for z, r, role in report.residues]
    return out


def bundle_from(real: Realization, params: CurvatureParams) -> dict:
    roles = [role for _, _, role in real.report.residues]
    records = classify(real.form, params)
    return {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "poles": [
            {**point_to_json(p.location), "residue": p.residue, "role": role}
            for p, role in zip(real.form.poles, roles)
        ],
        "mu": params.mu,
        "Lambda": params.Lambda,
        "A0": params.A0,
        "normalization": (
            {"p0": point_to_json(params.base_point), "K0": params.K0} if params.base_point is not None else {}
        ),
        "realized_saddles": [{**point_to_json(z.location), "multiplicity": z.multiplicity} for z in real.saddles],
        "classification": [
            {
                **point_to_json(r.location),
                "kind": r.kind.value,
                "angle_factor": r.angle_factor,
                "K_limit": r.K_limit,
                **({"residue": r.residue} if r.residue is not None else {"order": r.order}),
            }
            for r in records
        ],
        "existence": _report_to_dict(real.report),
        "warnings": list(real.warnings),
    }


def metric_from_bundle(bundle: Any, strict: bool = True) -> MetricField:
    """Rebuild the metric; strict=False keeps inconsistent mu/Lambda for auditing."""
    if not isinstance(bundle, dict) or bundle.get("format") != BUNDLE_FORMAT:
        raise ConfigError(f"not an {BUNDLE_FORMAT} document", "bundle")
    if bundle.get("version") != BUNDLE_VERSION:
        raise ConfigError(f"unsupported bundle version {bundle.get('version')!r}", "bundle.version")
    poles = []
    for i, p in enumerate(_list(bundle, "poles", "bundle")):
        poles.append(PoleSpec(_point(p, f"bundle.poles[{i}]"), _get(p, "residue", f"bundle.poles[{i}]")))
    try:
        form = build_form(poles)
        params = CurvatureParams(
            _get(bundle, "mu", "bundle"), _get(bundle, "Lambda", "bundle"), _get(bundle, "A0", "bundle"),
            check=strict,
        )
    except HCMUError as exc:
        raise ConfigError(str(exc), "bundle") from None
    return make_metric(form, params)


def write_json(data: Any, out: str | Path | None, stream) -> None:
    text = json.dumps(data, indent=2, allow_nan=True) + "\n"
    if out is None:
        stream.write(text)
    else:
        Path(out).write_text(text)


# -- CSV sampling -------------------------------------------------------------


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.17g}"


def sample_csv(metric: MetricField, sampling: Sampling) -> str:
    """RFC 4180 CSV of x, y, K, conformal_factor on a regular grid."""
    xs = np.linspace(sampling.xmin, sampling.xmax, sampling.nx)
    ys = np.linspace(sampling.ymin, sampling.ymax, sampling.ny)
    X, Y = np.meshgrid(xs, ys)
    Z = (X + 1j * Y).ravel()
    d = np.min(np.abs(Z[:, None] - metric.form.locations), axis=1)
    singular = d < POLE_EVAL_TOL * metric.form.diameter
    K = np.full(Z.shape, np.nan)
    F = np.full(Z.shape, np.nan)
    reg = Z[~singular]
    K[~singular] = metric.field.K(reg)
    F[~singular] = metric.conformal_factor(reg)
    buf = io.StringIO()
    buf.write("# hcmu sample grid; rows with K = nan are poles of omega (cusps or maxima of K)\r\n")
    buf.write(f"# singular rows: {int(singular.sum())}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["x", "y", "K", "conformal_factor"])
    for z, k, f in zip(Z, K, F):
        w.writerow([_fmt(z.real), _fmt(z.imag), _fmt(k), _fmt(f)])
    return buf.getvalue()
