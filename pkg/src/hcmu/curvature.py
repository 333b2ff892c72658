"""The curvature field K solving sigma(K) = f0 / Lambda + A0.

Write m = -mu > 0 and s = (t - mu) / m in (0, 3).  Then

    sigma(t) = ln(3 - s) - ln(s) + 3 / s,

so sigma depends on t only through s.  The inversion below works in the
logarithms of the two gaps s and d = 3 - s, which keeps K - mu and
-2 mu - K at full relative precision even when K is within 1e-300 of an
endpoint (that happens near every pole of omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BadNormalization, ConvergenceFailure, DomainError
from .oneform import RationalOneForm

LAMBDA_REL_TOL = 1e-12
NORMALIZATION_MIN_DIST = 1e-6  # relative to the pole-set diameter
_LN3 = math.log(3.0)
_LN15 = math.log(1.5)


class InteriorPoint(float):
    """A point t of (mu, -2 mu) that also remembers t - mu and -2 mu - t.

    Behaves as a plain float; ``sigma`` uses the stored gaps when present,
    which is what makes sigma(sigma_inverse(x)) accurate for large |x|.
    """

    log_gap_low: float
    log_gap_high: float

    def __new__(cls, value: float, log_gap_low: float, log_gap_high: float):
        obj = super().__new__(cls, value)
        obj.log_gap_low = log_gap_low
        obj.log_gap_high = log_gap_high
        return obj

    @property
    def gap_low(self) -> float:
        return math.exp(self.log_gap_low)

    @property
    def gap_high(self) -> float:
        return math.exp(self.log_gap_high)


def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not (mu < 0 and math.isfinite(mu)):
        raise DomainError(f"mu must be a finite negative number, got {mu}")
    return mu


def _gaps(t, mu: float):
    t = np.asarray(t, dtype=float)
    return t - mu, -2.0 * mu - t


def sigma(t, mu: float):
    """sigma(t) = ln(-2mu - t) - ln(t - mu) - 3mu/(t - mu) on (mu, -2mu)."""
    mu = _check_mu(mu)
    if isinstance(t, InteriorPoint):
        return t.log_gap_high - t.log_gap_low - 3.0 * mu * math.exp(-t.log_gap_low)
    lo, hi = _gaps(t, mu)
    lo_a, hi_a = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if np.any(~(lo_a > 0)) or np.any(~(hi_a > 0)):
        raise DomainError(f"sigma is defined on ({mu}, {-2 * mu}) only")
    out = np.log(hi_a) - np.log(lo_a) - 3.0 * mu / lo_a
    return float(out) if out.ndim == 0 else out


def sigma_prime(t, mu: float):
    mu = _check_mu(mu)
    if isinstance(t, InteriorPoint):
        return -9.0 * mu * mu * math.exp(-2.0 * t.log_gap_low - t.log_gap_high)
    lo, hi = _gaps(t, mu)
    lo_a, hi_a = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if np.any(~(lo_a > 0)) or np.any(~(hi_a > 0)):
        raise DomainError(f"sigma' is defined on ({mu}, {-2 * mu}) only")
    out = -9.0 * mu * mu / (lo_a * lo_a * hi_a)
    return float(out) if out.ndim == 0 else out


def _newton_bracketed(x, y, lo, hi, F, increasing: bool, max_iter: int = 200):
    """Safeguarded Newton for a monotone F(y, x) = 0, vectorized over x."""
    # iterate to step-level convergence: downstream finite differences divide
    # rounding noise in K by h^2, so a residual-based stop is too loose
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter):
        f, df = F(y, x)
        done |= f == 0.0
        if done.all():
            break
        pos = f > 0
        if increasing:
            hi = np.where(pos, y, hi)
            lo = np.where(pos, lo, y)
        else:
            lo = np.where(pos, y, lo)
            hi = np.where(pos, hi, y)
        step = f / df
        y_new = y - step
        bad = ~((y_new > lo) & (y_new < hi))
        y_new = np.where(bad, 0.5 * (lo + hi), y_new)
        tiny = np.abs(y_new - y) <= 4e-16 * np.maximum(1.0, np.abs(y))
        y = np.where(done, y, y_new)
        done |= tiny
    f, _ = F(y, x)
    if np.any(np.abs(f) > 1e-12 * np.maximum(1.0, np.abs(x))):
        raise ConvergenceFailure("sigma inversion did not reach the requested residual")
    return y


def _F_high(y, x):
    # unknown y = ln s on the cusp side (x >= 2, s <= 1.5)
    s = np.exp(y)
    inv_s = np.exp(-y)
    f = np.log(3.0 - s) - y + 3.0 * inv_s - x
    df = -s / (3.0 - s) - 1.0 - 3.0 * inv_s
    return f, df


def _F_low(y, x):
    # unknown y = ln d with d = 3 - s on the maximum side (x < 2, d <= 1.5)
    d = np.exp(y)
    s = 3.0 - d
    f = y - np.log(s) + 3.0 / s - x
    df = 1.0 + d / s + 3.0 * d / (s * s)
    return f, df


def invert_normalized(x):
    """Return (ln s, ln d) with sigma = x, s + d = 3; vectorized, mu-free."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("sigma_inverse needs finite arguments")
    flat = x.reshape(-1)
    log_s = np.empty_like(flat)
    log_d = np.empty_like(flat)
    high = flat >= 2.0
    if high.any():
        xh = flat[high]
        lo = np.log(3.0 / (xh + 3.0))
        hi = np.full_like(xh, _LN15)
        y0 = np.clip(np.log(3.0 / np.maximum(xh - np.log(xh / 3.0 + 1.0), 2.0)), lo, hi)
        y = _newton_bracketed(xh, y0, lo, hi, _F_high, increasing=False)
        log_s[high] = y
        log_d[high] = np.log(3.0 - np.exp(y))
    low = ~high
    if low.any():
        xl = flat[low]
        lo = xl - 2.0
        hi = np.full_like(xl, _LN15)
        y0 = np.clip(xl - 1.0 + _LN3, lo, hi)
        y = _newton_bracketed(xl, y0, lo, hi, _F_low, increasing=True)
        log_d[low] = y
        log_s[low] = np.log(3.0 - np.exp(y))
    return log_s.reshape(x.shape), log_d.reshape(x.shape)


def sigma_inverse(x, mu: float):
    """Unique t in (mu, -2mu) with sigma(t) = x.

    Scalars come back as an ``InteriorPoint`` carrying both gaps; arrays come
    back as plain float arrays.
    """
    mu = _check_mu(mu)
    m = -mu
    log_s, log_d = invert_normalized(x)
    t = np.where(log_s < log_d, mu + m * np.exp(log_s), -2.0 * mu - m * np.exp(log_d))
    if np.ndim(x) == 0:
        ln_m = math.log(m)
        return InteriorPoint(float(t), ln_m + float(log_s), ln_m + float(log_d))
    return t


@dataclass(frozen=True)
class CurvatureParams:
    """mu < 0 with Lambda = -1/(3 mu^2), plus the additive constant A0."""

    mu: float
    Lambda: float
    A0: float = 0.0
    base_point: complex | None = None
    K0: float | None = None
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if not self.check:
            return
        _check_mu(self.mu)
        expected = -1.0 / (3.0 * self.mu**2)
        if abs(self.Lambda - expected) > LAMBDA_REL_TOL * abs(expected):
            raise BadNormalization(f"Lambda={self.Lambda!r} inconsistent with mu={self.mu!r}")
        if not math.isfinite(self.A0):
            raise BadNormalization("A0 must be finite")

    @property
    def C(self) -> float:
        return self.mu**2

    @property
    def C_prime(self) -> float:
        return -2.0 / 3.0 * self.mu**3

    @property
    def K_min(self) -> float:
        return self.mu

    @property
    def K_max(self) -> float:
        return -2.0 * self.mu


def mu_from_lambda(Lambda: float) -> float:
    if not Lambda < 0:
        raise DomainError(f"Lambda must be negative, got {Lambda}")
    return -1.0 / math.sqrt(-3.0 * Lambda)


def lambda_from_mu(mu: float) -> float:
    return -1.0 / (3.0 * _check_mu(mu) ** 2)


def make_params(
    form: RationalOneForm,
    *,
    Lambda: float | None = None,
    mu: float | None = None,
    A0: float | None = None,
    base_point: complex | None = None,
    K0: float | None = None,
) -> CurvatureParams:
    """Build consistent parameters; normalize either by A0 or by K(p0) = K0.

    With no normalization at all, A0 = 0.
    """
    if Lambda is None and mu is None:
        raise BadNormalization("one of Lambda or mu is required")
    if mu is None:
        mu = mu_from_lambda(Lambda)
    mu = _check_mu(mu)
    if Lambda is None:
        Lambda = lambda_from_mu(mu)
    elif abs(Lambda - lambda_from_mu(mu)) > LAMBDA_REL_TOL * abs(Lambda):
        raise BadNormalization(f"Lambda={Lambda} and mu={mu} disagree")
    else:
        Lambda = lambda_from_mu(mu)

    if (base_point is None) != (K0 is None):
        raise BadNormalization("normalization by value needs both base_point and K0")
    if base_point is not None:
        if A0 is not None:
            raise BadNormalization("give either A0 or (base_point, K0), not both")
        K0 = float(K0)
        if not (mu < K0 < -2.0 * mu):
            raise BadNormalization(f"K0={K0} must lie strictly inside ({mu}, {-2 * mu})")
        p0 = complex(base_point)
        tol = NORMALIZATION_MIN_DIST * form.diameter
        if np.min(np.abs(form.locations - p0)) <= tol:
            raise BadNormalization(f"base point {p0} is a pole of omega")
        for zr in form.zeros():
            if not zr.at_infinity and abs(zr.location - p0) <= tol:
                raise BadNormalization(f"base point {p0} is a zero of omega")
        A0 = sigma(K0, mu) - form.potential(p0) / Lambda
        return CurvatureParams(mu, Lambda, float(A0), p0, K0)
    return CurvatureParams(mu, Lambda, 0.0 if A0 is None else float(A0))


class CurvatureSample(NamedTuple):
    K: np.ndarray
    log_gap_low: np.ndarray  # ln(K - mu)
    log_gap_high: np.ndarray  # ln(-2 mu - K)


@dataclass(frozen=True)
class CurvatureField:
    form: RationalOneForm
    params: CurvatureParams

    def _from_argument(self, x) -> CurvatureSample:
        mu = self.params.mu
        m = -mu
        log_s, log_d = invert_normalized(x)
        ln_m = math.log(m)
        K = np.where(log_s < log_d, mu + m * np.exp(log_s), -2.0 * mu - m * np.exp(log_d))
        return CurvatureSample(K, ln_m + log_s, ln_m + log_d)

    def argument(self, z):
        """sigma(K(z)) = f0(z) / Lambda + A0."""
        return self.form.potential(z) / self.params.Lambda + self.params.A0

    def sample(self, z) -> CurvatureSample:
        return self._from_argument(self.argument(z))

    def sample_near_pole(self, k: int, log_r, theta):
        """Curvature sample and (z - b_k) rho(z) in log-polar coordinates at pole k."""
        f0, w = self.form.local_polar(k, log_r, theta)
        return self._from_argument(f0 / self.params.Lambda + self.params.A0), w

    def sample_at_infinity_chart(self, w) -> CurvatureSample:
        x = self.form.potential_at_infinity_chart(w) / self.params.Lambda + self.params.A0
        return self._from_argument(x)

    def K(self, z):
        out = self.sample(z).K
        return float(out) if np.ndim(z) == 0 else out

    def grad_K(self, z):
        """Wirtinger derivative K_z = -(1/3)(K - mu)^2 (K + 2mu) rho(z).

        The real gradient is (2 Re K_z, -2 Im K_z).
        """
        smp = self.sample(z)
        rho = self.form.evaluate(z)
        out = np.exp(2.0 * smp.log_gap_low + smp.log_gap_high) * rho / 3.0
        return complex(out) if np.ndim(z) == 0 else out
