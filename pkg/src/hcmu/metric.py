"""The conformal metric g = -(4/3)(K - mu)^2 (K + 2mu) |rho|^2 |dz|^2 and
the classification of its singular points."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .curvature import CurvatureField, CurvatureParams
from .errors import UnclassifiablePole
from .oneform import INFINITY, Location, RationalOneForm

SMOOTH_MAX_TOL = 1e-9
_LN43 = math.log(4.0 / 3.0)


class SingularityKind(str, enum.Enum):
    CUSP = "CUSP"
    CONICAL_MAX = "CONICAL_MAX"
    SMOOTH_MAX = "SMOOTH_MAX"
    CONICAL_SADDLE = "CONICAL_SADDLE"


@dataclass(frozen=True)
class SingularityRecord:
    location: Location
    kind: SingularityKind
    angle_factor: float | None
    K_limit: float
    residue: float | None = None  # poles only
    order: int | None = None  # zeros only

    @property
    def is_pole(self) -> bool:
        return self.residue is not None


@dataclass(frozen=True)
class MetricField:
    field: CurvatureField

    @property
    def form(self) -> RationalOneForm:
        return self.field.form

    @property
    def params(self) -> CurvatureParams:
        return self.field.params

    def log_conformal_factor(self, z):
        """ln e^{2 phi}; -inf at zeros of omega."""
        smp = self.field.sample(z)
        rho = np.asarray(self.form.evaluate(z))
        with np.errstate(divide="ignore"):
            out = _LN43 + 2.0 * smp.log_gap_low + smp.log_gap_high + 2.0 * np.log(np.abs(rho))
        return float(out) if np.ndim(z) == 0 else out

    def conformal_factor(self, z):
        out = np.exp(self.log_conformal_factor(z))
        return float(out) if np.ndim(z) == 0 else out

    def phi(self, z):
        out = 0.5 * np.asarray(self.log_conformal_factor(z))
        return float(out) if np.ndim(z) == 0 else out

    def log_scaled_factor_near_pole(self, k: int, log_r, theta):
        """(K, ln(r^2 e^{2 phi})) at z = b_k + r e^{i theta}, given ln r.

        r^2 e^{2phi} = (4/3)(K - mu)^2(-2mu - K)|(z - b_k) rho|^2 stays
        representable for radii far below the float range.
        """
        smp, w = self.field.sample_near_pole(k, log_r, theta)
        log_val = _LN43 + 2.0 * smp.log_gap_low + smp.log_gap_high + 2.0 * np.log(np.abs(w))
        return smp.K, log_val

    def log_conformal_factor_at_infinity_chart(self, w):
        """(K, ln e^{2 phi~}) in the chart w = 1/z, where e^{2phi~} = e^{2phi}/|w|^4."""
        smp = self.field.sample_at_infinity_chart(w)
        rho = np.asarray(self.form.evaluate_at_infinity_chart(w))
        with np.errstate(divide="ignore"):
            out = _LN43 + 2.0 * smp.log_gap_low + smp.log_gap_high + 2.0 * np.log(np.abs(rho))
        return smp.K, out


def make_metric(form: RationalOneForm, params: CurvatureParams) -> MetricField:
    return MetricField(CurvatureField(form, params))


def classify(form: RationalOneForm, params: CurvatureParams) -> list[SingularityRecord]:
    """One record per pole and per distinct zero (including infinity)."""
    records = []
    Lam = params.Lambda
    for pole in form.poles:
        r = pole.residue
        if r > 0:
            records.append(SingularityRecord(pole.location, SingularityKind.CUSP, None, params.mu, residue=r))
        elif r < 0:
            alpha = r / Lam
            if abs(alpha - 1.0) <= SMOOTH_MAX_TOL:
                kind, alpha = SingularityKind.SMOOTH_MAX, 1.0
            else:
                kind = SingularityKind.CONICAL_MAX
            records.append(SingularityRecord(pole.location, kind, alpha, -2.0 * params.mu, residue=r))
        else:
            raise UnclassifiablePole(f"pole at {pole.location} has zero residue")
    field = CurvatureField(form, params)
    for zr in form.zeros():
        if zr.location is INFINITY:
            K = float(field.sample_at_infinity_chart(0.0).K)
        else:
            K = field.K(zr.location)
        records.append(
            SingularityRecord(
                zr.location, SingularityKind.CONICAL_SADDLE, float(zr.multiplicity + 1), K, order=zr.multiplicity
            )
        )
    return records
