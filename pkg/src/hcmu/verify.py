"""Numerical audit of a constructed metric.

Checks, each independent of the construction path it audits:

* the curvature equation  Delta phi + K e^{2phi} = 0  by a 5-point stencil,
* the gradient relation  dK = -(1/3)(K - mu)^2 (K + 2mu)(omega + conj omega)
  by central differences,
* cone angles from the growth of small circumferences,
* cusp behaviour of phi and K,
* the moments  C_n = int K^n dg  by area quadrature, against the closed form.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotACusp, QuadratureBudgetExceeded, RadiusTooLarge, StencilTooClose
from .metric import MetricField, SingularityKind, classify
from .oneform import INFINITY

# ---------------------------------------------------------------------------
# configuration


@dataclass
class Tolerances:
    pde_h: float = 1e-3
    pde_points: int = 200
    pde_min_dist: float = 0.6  # see README: relative residual blows up near saddles
    pde_max_residual: float = 1e-4
    pde_order_range: tuple[float, float] = (1.8, 2.2)
    gradient_h: float = 1e-5
    gradient_points: int = 50
    gradient_min_dist: float = 0.1
    gradient_max_rel: float = 1e-6
    cone_radii: tuple[float, ...] = (1e-3, 1e-4, 1e-5, 1e-6)
    saddle_radii: tuple[float, ...] = (1e-3, 3e-4, 1e-4)
    cone_rel_tol: float = 0.01
    cusp_radii: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    cusp_s_max: float = 0.05
    cusp_t_rel: float = 0.05
    energy_n_max: int = 3
    energy_rel_tol: float = 0.01
    energy_rel_tol_high: float = 0.03  # n >= 3
    saddle_grad_tol: float = 1e-8

    @classmethod
    def from_dict(cls, data: dict) -> "Tolerances":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise KeyError(", ".join(sorted(unknown)))
        kw = {}
        for k, v in data.items():
            default = getattr(cls, k)
            kw[k] = tuple(float(x) for x in v) if isinstance(default, tuple) else type(default)(v)
        return cls(**kw)


def worker_count() -> int:
    env = os.environ.get("HCMU_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# sample points


def singular_points(metric: MetricField) -> np.ndarray:
    """Finite poles and zeros of omega."""
    pts = list(metric.form.locations)
    pts += [zr.location for zr in metric.form.zeros() if not zr.at_infinity]
    return np.array(pts, dtype=complex)


def regular_points(metric: MetricField, n: int, min_dist: float, seed: int = 0, pad: float = 1.0) -> np.ndarray:
    """n points in the padded bounding box of the poles, min_dist away from poles and zeros."""
    sing = singular_points(metric)
    locs = metric.form.locations
    lo = complex(locs.real.min() - pad, locs.imag.min() - pad)
    hi = complex(locs.real.max() + pad, locs.imag.max() + pad)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        z = rng.uniform(lo.real, hi.real, 4 * n) + 1j * rng.uniform(lo.imag, hi.imag, 4 * n)
        d = np.min(np.abs(z[:, None] - sing), axis=1)
        out.extend(z[d >= min_dist][: n - len(out)])
    return np.array(out)


def _require_clearance(metric: MetricField, points: np.ndarray, clearance: float) -> None:
    d = np.min(np.abs(points[:, None] - singular_points(metric)), axis=1)
    if np.any(d < clearance):
        raise StencilTooClose(f"a sample point lies within {clearance} of a pole or zero of omega")


# ---------------------------------------------------------------------------
# curvature equation


@dataclass
class ResidualReport:
    h: float
    residuals: list[float]
    residuals_half: list[float]
    max_residual: float
    max_residual_half: float
    order: float

    def passed(self, max_residual: float, order_range: tuple[float, float] | None) -> bool:
        ok = self.max_residual <= max_residual
        if order_range is not None:
            ok = ok and order_range[0] <= self.order <= order_range[1]
        return bool(ok)


def _laplacian_residual(metric: MetricField, z: np.ndarray, h: float) -> np.ndarray:
    phi = metric.phi
    lap = (phi(z + h) + phi(z - h) + phi(z + 1j * h) + phi(z - 1j * h) - 4.0 * phi(z)) / h**2
    K = metric.field.K(z)
    e2phi = metric.conformal_factor(z)
    return np.abs(lap + K * e2phi) / e2phi


def check_curvature_pde(metric: MetricField, points: Sequence[complex], h: float = 1e-3) -> ResidualReport:
    """Relative residual |Delta phi + K e^{2phi}| / e^{2phi} at spacing h and h/2."""
    z = np.asarray(points, dtype=complex)
    _require_clearance(metric, z, 10 * h)
    r1 = _laplacian_residual(metric, z, h)
    r2 = _laplacian_residual(metric, z, h / 2)
    m1, m2 = float(r1.max()), float(r2.max())
    order = math.log2(m1 / m2) if m2 > 0 else float("inf")
    return ResidualReport(h, r1.tolist(), r2.tolist(), m1, m2, order)


# ---------------------------------------------------------------------------
# gradient relation


@dataclass
class GradientReport:
    h: float
    rel_errors: list[float]
    max_rel_error: float
    max_rel_error_plain: float  # no extrapolation, spacing h
    max_rel_error_plain_half: float
    order: float


def _central_grad(metric: MetricField, z: np.ndarray, h: float) -> np.ndarray:
    K = metric.field.K
    gx = (K(z + h) - K(z - h)) / (2 * h)
    gy = (K(z + 1j * h) - K(z - 1j * h)) / (2 * h)
    return gx + 1j * gy


def analytic_gradient(metric: MetricField, z) -> np.ndarray:
    """(K_x, K_y) packed as K_x + i K_y, from K_z."""
    Kz = np.asarray(metric.field.grad_K(z))
    return 2.0 * Kz.real - 2j * Kz.imag


def check_gradient(metric: MetricField, points: Sequence[complex], h: float = 1e-5) -> GradientReport:
    z = np.asarray(points, dtype=complex)
    _require_clearance(metric, z, 10 * h)
    exact = analytic_gradient(metric, z)
    g1 = _central_grad(metric, z, h)
    g2 = _central_grad(metric, z, h / 2)
    extrap = (4.0 * g2 - g1) / 3.0
    denom = np.abs(exact)
    rel = np.abs(extrap - exact) / denom
    e1 = float((np.abs(g1 - exact) / denom).max())
    e2 = float((np.abs(g2 - exact) / denom).max())
    order = math.log2(e1 / e2) if e2 > 0 else float("inf")
    return GradientReport(h, rel.tolist(), float(rel.max()), e1, e2, order)


# ---------------------------------------------------------------------------
# cone angles and cusps


@dataclass
class ConeEstimate:
    center: object
    radii: list[float]
    log_lengths: list[float]
    local_slopes: list[float]
    alpha: float


def _log_circumference(metric: MetricField, center, r: float, n_theta: int) -> float:
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    if center is INFINITY:
        w = r * np.exp(1j * theta)
        _, lf = metric.log_conformal_factor_at_infinity_chart(w)
        half = 0.5 * lf + math.log(r)
    else:
        try:
            k = metric.form.pole_index(center)
        except KeyError:
            lf = metric.log_conformal_factor(center + r * np.exp(1j * theta))
            half = 0.5 * lf + math.log(r)
        else:
            _, ls = metric.log_scaled_factor_near_pole(k, np.full(n_theta, math.log(r)), theta)
            half = 0.5 * ls
    top = half.max()
    return float(top + math.log(2 * np.pi * np.mean(np.exp(half - top))))


def _isolation_radius(metric: MetricField, center) -> float:
    if center is INFINITY:
        return float(1.0 / np.max(np.abs(metric.form.locations)))
    d = np.abs(singular_points(metric) - complex(center))
    d = d[d > 1e-12]
    return float(d.min())


def estimate_cone_angle(metric: MetricField, center, radii: Sequence[float], n_theta: int = 256) -> ConeEstimate:
    """Least-squares slope of ln L(r) against ln r, L the circumference of |z - center| = r.

    ``center`` may be INFINITY, in which case circles are taken in w = 1/z.
    """
    radii = sorted((float(r) for r in radii), reverse=True)
    if radii[0] >= _isolation_radius(metric, center):
        raise RadiusTooLarge(f"circle of radius {radii[0]} around {center} contains another singular point")
    logs = np.array([_log_circumference(metric, center, r, n_theta) for r in radii])
    lr = np.log(radii)
    slopes = np.diff(logs) / np.diff(lr)
    alpha = float(np.polyfit(lr, logs, 1)[0])
    return ConeEstimate(center, radii, logs.tolist(), slopes.tolist(), alpha)


@dataclass
class CuspReport:
    center: complex
    radii: list[float]
    s_values: list[float]  # (mean phi + ln r) / ln r
    t_values: list[float]  # (K - mu) ln r along the positive real direction
    s_max: float
    t_rel_tol: float

    @property
    def s_decreasing(self) -> bool:
        a = np.abs(self.s_values)
        return bool(np.all(np.diff(a) < 0))

    @property
    def s_small(self) -> bool:
        return abs(self.s_values[-1]) <= self.s_max

    @property
    def t_agreement(self) -> float:
        a, b = self.t_values[-2], self.t_values[-1]
        return abs(a - b) / abs(b)

    @property
    def t_nonzero(self) -> bool:
        return abs(self.t_values[-1]) > 1e-3

    @property
    def passed(self) -> bool:
        return self.s_small and self.s_decreasing and self.t_agreement <= self.t_rel_tol and self.t_nonzero


def check_cusp(
    metric: MetricField,
    center: complex,
    radii: Sequence[float],
    n_theta: int = 128,
    s_max: float = 0.05,
    t_rel_tol: float = 0.05,
) -> CuspReport:
    try:
        k = metric.form.pole_index(center)
    except KeyError:
        raise NotACusp(f"{center} is not a pole of omega") from None
    if not metric.form.residues[k] > 0:
        raise NotACusp(f"pole at {center} has residue {metric.form.residues[k]} <= 0")
    radii = sorted((float(r) for r in radii), reverse=True)
    if radii[0] >= _isolation_radius(metric, center):
        raise RadiusTooLarge(f"radius {radii[0]} reaches another singular point")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    s_vals, t_vals = [], []
    mu = metric.params.mu
    for r in radii:
        lr = math.log(r)
        K, ls = metric.log_scaled_factor_near_pole(k, np.full(n_theta, lr), theta)
        # ls = ln(r^2 e^{2 phi}) so phi + ln r = ls / 2
        s_vals.append(float(np.mean(0.5 * ls) / lr))
        t_vals.append(float((K[0] - mu) * lr))
    return CuspReport(complex(metric.form.locations[k]), radii, s_vals, t_vals, s_max, t_rel_tol)


# ---------------------------------------------------------------------------
# energy moments


def closed_form_Cn(mu: float, alpha_max: float, n: int) -> float:
    """C_n = 2/(3(n+1)) mu^(n-1) ((-2)^(n+1) - 1) alpha_max."""
    return 2.0 / (3.0 * (n + 1)) * mu ** (n - 1) * ((-2.0) ** (n + 1) - 1.0) * alpha_max


def alpha_max_of(metric: MetricField) -> float:
    """2 pi times the sum of the angle factors at maxima, read off the residues."""
    neg = metric.form.residues[metric.form.residues < 0]
    return float(2 * np.pi * math.fsum(neg / metric.params.Lambda))


@dataclass
class QuadratureSettings:
    r_split: float = 1.0
    n_theta_patch: int = 64
    n_theta_chart: int = 512
    chart_panels: int = 96
    gauss_order: int = 10
    budget: int = 5_000_000


def _gauss_panels(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def _bump(r: np.ndarray, eps: float) -> np.ndarray:
    """Smooth cutoff: 1 on r <= eps/2, 0 on r >= eps."""
    t = np.clip((r - 0.5 * eps) / (0.5 * eps), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        b = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return a / (a + b)


def _patch_radii(metric: MetricField) -> np.ndarray:
    locs = metric.form.locations
    d = np.abs(locs[:, None] - locs[None, :])
    np.fill_diagonal(d, np.inf)
    return np.minimum(0.4 * d.min(axis=1), 0.5)


def _moments(values_K: np.ndarray, density: np.ndarray, weights: np.ndarray, ns: Sequence[int]) -> np.ndarray:
    return np.array([float(np.sum(values_K**n * density * weights)) for n in ns])


def _pole_patch(metric: MetricField, k: int, eps: float, ns, qs: QuadratureSettings) -> np.ndarray:
    """Integral of bump * K^n dg over the disk of radius eps around pole k."""
    n_th = qs.n_theta_patch
    theta = 2 * np.pi * np.arange(n_th) / n_th
    w_theta = 2 * np.pi / n_th
    residue = metric.form.residues[k]
    u_top = math.log(0.5 * eps)
    total = np.zeros(len(ns))

    if residue > 0:
        # cusp: v = -1/ln r maps (0, eps/2] to (0, v_top]; the area element
        # r^2 e^{2phi} du becomes r^2 e^{2phi} / v^2 dv, bounded as v -> 0.
        v_top = -1.0 / u_top
        edges = np.concatenate([[0.0], v_top * 0.5 ** np.arange(40, -1, -1)])
        v, wv = _gauss_panels(edges, qs.gauss_order)
        u = -1.0 / v
        U, TH = np.meshgrid(u, theta, indexing="ij")
        K, ls = metric.log_scaled_factor_near_pole(k, U, TH)
        dens = np.exp(ls + 2.0 * np.log(-U))
        W = (wv[:, None] * w_theta) * np.ones_like(TH)
        total += _moments(K, dens, W, ns)
    else:
        # maximum of angle alpha: r^2 e^{2phi} ~ r^{2 alpha}, decays exponentially in u = ln r
        alpha = residue / metric.params.Lambda
        span = 40.0 / (2.0 * alpha)
        n_pan = max(8, int(math.ceil(span)))
        u, wu = _gauss_panels(np.linspace(u_top - span, u_top, n_pan + 1), qs.gauss_order)
        U, TH = np.meshgrid(u, theta, indexing="ij")
        K, ls = metric.log_scaled_factor_near_pole(k, U, TH)
        W = (wu[:, None] * w_theta) * np.ones_like(TH)
        total += _moments(K, np.exp(ls), W, ns)

    # transition annulus eps/2 < r < eps, in r with the cutoff applied
    r, wr = _gauss_panels(np.linspace(0.5 * eps, eps, 9), qs.gauss_order)
    R, TH = np.meshgrid(r, theta, indexing="ij")
    K, ls = metric.log_scaled_factor_near_pole(k, np.log(R), TH)
    dens = np.exp(ls) / R  # e^{2phi} r
    W = (wr[:, None] * w_theta) * _bump(R, eps)
    total += _moments(K, dens, W, ns)
    return total


def _chart_patch(metric: MetricField, eps: np.ndarray, ns, qs: QuadratureSettings, at_infinity: bool) -> np.ndarray:
    """Integral of (1 - sum of bumps) K^n dg over |z| <= R or |w| <= 1/R."""
    rmax = 1.0 / qs.r_split if at_infinity else qs.r_split
    n_th = qs.n_theta_chart
    theta = 2 * np.pi * np.arange(n_th) / n_th
    r, wr = _gauss_panels(np.linspace(0.0, rmax, qs.chart_panels + 1), qs.gauss_order)
    R, TH = np.meshgrid(r, theta, indexing="ij")
    pts = R * np.exp(1j * TH)
    W = wr[:, None] * R * (2 * np.pi / n_th)
    with np.errstate(divide="ignore"):
        z = 1.0 / pts if at_infinity else pts
    keep = np.ones(pts.shape)
    for k, b in enumerate(metric.form.locations):
        dist = np.abs(z - b) if not at_infinity else np.abs(z - b)
        keep = keep - _bump(np.nan_to_num(dist, nan=np.inf, posinf=np.inf), eps[k])
    mask = keep > 0
    sel = pts[mask]
    if at_infinity:
        K, lf = metric.log_conformal_factor_at_infinity_chart(sel)
    else:
        K = metric.field.K(sel)
        lf = metric.log_conformal_factor(sel)
    return _moments(K, np.exp(lf), W[mask] * keep[mask], ns)


def integrate_moments(
    metric: MetricField, ns: Sequence[int] = (0, 1, 2, 3), settings: QuadratureSettings | None = None
) -> dict[int, float]:
    """Area quadrature of C_n = int K^n e^{2phi} dA over the whole sphere."""
    qs = settings or QuadratureSettings()
    ns = list(ns)
    eps = _patch_radii(metric)
    m = metric.form.n_poles
    cost = m * (80 * qs.gauss_order * qs.n_theta_patch) + 2 * qs.chart_panels * qs.gauss_order * qs.n_theta_chart
    if cost > qs.budget:
        raise QuadratureBudgetExceeded(f"quadrature needs {cost} nodes, budget is {qs.budget}")
    jobs = [(_pole_patch, (metric, k, eps[k], ns, qs)) for k in range(m)]
    jobs += [(_chart_patch, (metric, eps, ns, qs, False)), (_chart_patch, (metric, eps, ns, qs, True))]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        parts = list(pool.map(lambda job: job[0](*job[1]), jobs))
    total = np.zeros(len(ns))
    for p in parts:  # fixed order: deterministic sum
        total += p
    return {n: float(v) for n, v in zip(ns, total)}


def integrate_Cn(metric: MetricField, n: int, settings: QuadratureSettings | None = None) -> float:
    return integrate_moments(metric, [n], settings)[n]


@dataclass
class EnergyRow:
    n: int
    quadrature: float
    closed_form: float
    rel_error: float


def energy_table(metric: MetricField, n_max: int = 3, settings: QuadratureSettings | None = None) -> list[EnergyRow]:
    ns = list(range(n_max + 1))
    quad = integrate_moments(metric, ns, settings)
    amax = alpha_max_of(metric)
    rows = []
    for n in ns:
        cf = closed_form_Cn(metric.params.mu, amax, n)
        rows.append(EnergyRow(n, quad[n], cf, abs(quad[n] - cf) / abs(cf)))
    return rows


# ---------------------------------------------------------------------------
# full audit


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def run_audit(
    metric: MetricField,
    tol: Tolerances | None = None,
    seed: int = 0,
    quadrature: QuadratureSettings | None = None,
) -> VerificationReport:
    tol = tol or Tolerances()
    checks: list[CheckResult] = []
    params = metric.params

    expected_lambda = -1.0 / (3.0 * params.mu**2)
    lam_err = abs(params.Lambda - expected_lambda) / abs(expected_lambda)
    checks.append(CheckResult("params_consistency", lam_err <= 1e-12, {"lambda_rel_error": lam_err}))

    pts = regular_points(metric, tol.pde_points, tol.pde_min_dist, seed)
    pde = check_curvature_pde(metric, pts, tol.pde_h)
    checks.append(
        CheckResult(
            "curvature_pde",
            pde.passed(tol.pde_max_residual, tol.pde_order_range),
            {"h": pde.h, "max_residual": pde.max_residual, "max_residual_half": pde.max_residual_half,
             "order": pde.order, "points": len(pts)},
        )
    )

    gpts = regular_points(metric, tol.gradient_points, tol.gradient_min_dist, seed + 1)
    grad = check_gradient(metric, gpts, tol.gradient_h)
    checks.append(
        CheckResult(
            "gradient_ode",
            grad.max_rel_error <= tol.gradient_max_rel,
            {"h": grad.h, "max_rel_error": grad.max_rel_error, "order": grad.order, "points": len(gpts)},
        )
    )

    for rec in classify(metric.form, params):
        loc = rec.location
        label = "infinity" if loc is INFINITY else f"{loc.real:.6g}{loc.imag:+.6g}j"
        if rec.kind is SingularityKind.CUSP:
            cr = check_cusp(metric, loc, tol.cusp_radii, s_max=tol.cusp_s_max, t_rel_tol=tol.cusp_t_rel)
            checks.append(
                CheckResult(
                    f"cusp@{label}",
                    cr.passed,
                    {"radii": cr.radii, "s": cr.s_values, "t": cr.t_values, "s_decreasing": cr.s_decreasing,
                     "t_agreement": cr.t_agreement},
                )
            )
            continue
        radii = tol.saddle_radii if rec.kind is SingularityKind.CONICAL_SADDLE else tol.cone_radii
        est = estimate_cone_angle(metric, loc, radii)
        err = abs(est.alpha - rec.angle_factor) / rec.angle_factor
        detail = {"kind": rec.kind.value, "alpha_expected": rec.angle_factor, "alpha_estimated": est.alpha,
                  "rel_error": err}
        ok = err <= tol.cone_rel_tol
        if rec.kind is SingularityKind.CONICAL_SADDLE and loc is not INFINITY:
            g = float(np.abs(metric.field.grad_K(loc)))
            scale = float(np.abs(metric.field.grad_K(loc + est.radii[0])))
            detail.update({"K": rec.K_limit, "grad_K": g, "grad_scale": scale})
            ok = ok and params.mu < rec.K_limit < -2 * params.mu and g <= tol.saddle_grad_tol * max(scale, 1.0)
        checks.append(CheckResult(f"cone@{label}", ok, detail))

    for row in energy_table(metric, tol.energy_n_max, quadrature):
        lim = tol.energy_rel_tol if row.n < 3 else tol.energy_rel_tol_high
        checks.append(CheckResult(f"energy_C{row.n}", row.rel_error <= lim and row.quadrature > 0, asdict(row)))
    return VerificationReport(checks)
