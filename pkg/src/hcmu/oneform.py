"""Rational 1-forms with simple poles and real residues on the Riemann sphere.

A form is stored by its partial-fraction data

    omega = sum_k r_k dz / (z - b_k),      sum_k r_k = 0,

so it has no pole at infinity.  Everything downstream (the curvature
potential, the metric, the singularity dictionary) is built from this data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    AmbiguousContour,
    DuplicatePole,
    EvaluationAtPole,
    ResidueSumNonzero,
    RootFindingFailure,
    TooFewPoles,
)

RESIDUE_SUM_TOL = 1e-12
COLLISION_TOL = 1e-9  # relative to the diameter of the pole set
POLE_EVAL_TOL = 1e-13  # relative to the diameter of the pole set
ZERO_CLUSTER_TOL = 1e-8
LOOSE_CLUSTER_TOL = 1e-5
LEADING_COEF_TOL = 1e-12


class _PointAtInfinity:
    """The point at infinity of the sphere; a singleton, never a float."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return "INFINITY"


INFINITY = _PointAtInfinity()

Location = Union[complex, _PointAtInfinity]


@dataclass(frozen=True)
class PoleSpec:
    location: complex
    residue: float

    def __post_init__(self):
        object.__setattr__(self, "location", complex(self.location))
        object.__setattr__(self, "residue", float(self.residue))
        if not self.residue != 0.0 or not math.isfinite(self.residue):
            raise ValueError(f"pole residue must be finite and nonzero, got {self.residue}")


@dataclass(frozen=True)
class ZeroRecord:
    location: Location
    multiplicity: int

    @property
    def at_infinity(self) -> bool:
        return self.location is INFINITY


def _diameter(points: np.ndarray) -> float:
    diffs = np.abs(points[:, None] - points[None, :])
    return float(diffs.max())


def _csum(values) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


@dataclass(frozen=True)
class RationalOneForm:
    """omega = sum_k r_k dz/(z - b_k) with real r_k summing to zero."""

    poles: tuple[PoleSpec, ...]
    _locations: np.ndarray = field(init=False, repr=False, compare=False)
    _residues: np.ndarray = field(init=False, repr=False, compare=False)
    _zeros: tuple = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        poles = tuple(self.poles)
        object.__setattr__(self, "poles", poles)
        if len(poles) < 2:
            raise TooFewPoles(f"a 1-form on the sphere needs at least 2 poles, got {len(poles)}")
        total = math.fsum(p.residue for p in poles)
        if abs(total) > RESIDUE_SUM_TOL:
            raise ResidueSumNonzero(f"residues sum to {total!r}; no such form exists on the sphere")
        locs = np.array([p.location for p in poles], dtype=complex)
        diam = _diameter(locs)
        for i in range(len(poles)):
            for j in range(i):
                if abs(locs[i] - locs[j]) <= COLLISION_TOL * diam:
                    raise DuplicatePole(f"poles {j} and {i} coincide at {locs[i]}")
        res = _symmetrize([p.residue for p in poles])
        poles = tuple(PoleSpec(p.location, r) for p, r in zip(poles, res))
        object.__setattr__(self, "poles", poles)
        locs.setflags(write=False)
        res_arr = np.array(res, dtype=float)
        res_arr.setflags(write=False)
        object.__setattr__(self, "_locations", locs)
        object.__setattr__(self, "_residues", res_arr)

    # -- basic data -------------------------------------------------------

    @property
    def locations(self) -> np.ndarray:
        return self._locations

    @property
    def residues(self) -> np.ndarray:
        return self._residues

    @property
    def n_poles(self) -> int:
        return len(self.poles)

    @property
    def diameter(self) -> float:
        return _diameter(self._locations)

    def pole_index(self, location: complex, tol: float | None = None) -> int:
        """Index of the pole at ``location``; KeyError if there is none."""
        tol = COLLISION_TOL * self.diameter if tol is None else tol
        d = np.abs(self._locations - complex(location))
        k = int(np.argmin(d))
        if d[k] > tol:
            raise KeyError(f"no pole at {location}")
        return k

    def _check_regular(self, z: np.ndarray) -> None:
        d = np.abs(z[..., None] - self._locations)
        if d.size and d.min() < POLE_EVAL_TOL * self.diameter:
            raise EvaluationAtPole("evaluation point coincides with a pole of omega")

    # -- evaluation -------------------------------------------------------

    def evaluate(self, z):
        """Coefficient rho(z) of omega = rho(z) dz in the plane chart."""
        za = np.asarray(z, dtype=complex)
        self._check_regular(za)
        out = np.sum(self._residues / (za[..., None] - self._locations), axis=-1)
        return complex(out) if np.ndim(z) == 0 else out

    def evaluate_derivative(self, z):
        za = np.asarray(z, dtype=complex)
        self._check_regular(za)
        out = -np.sum(self._residues / (za[..., None] - self._locations) ** 2, axis=-1)
        return complex(out) if np.ndim(z) == 0 else out

    def potential(self, z):
        """Real potential f0 = sum_k r_k ln|z - b_k|^2, with d f0 = omega + conj(omega)."""
        za = np.asarray(z, dtype=complex)
        self._check_regular(za)
        out = np.sum(self._residues * np.log(np.abs(za[..., None] - self._locations) ** 2), axis=-1)
        return float(out) if np.ndim(z) == 0 else out

    def local_polar(self, k: int, log_r, theta):
        """Potential and (z - b_k) * rho(z) at z = b_k + exp(log_r + i theta).

        Both are evaluated without forming 1/(z - b_k), so ``log_r`` may be far
        below the float underflow threshold.  The second value tends to the
        residue r_k as log_r -> -inf.
        """
        log_r = np.asarray(log_r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        dz = np.exp(log_r + 1j * theta)
        z = self._locations[k] + dz
        others = np.arange(self.n_poles) != k
        b = self._locations[others]
        r = self._residues[others]
        diff = z[..., None] - b
        f0 = 2.0 * self._residues[k] * log_r + np.sum(r * np.log(np.abs(diff) ** 2), axis=-1)
        w = self._residues[k] + dz * np.sum(r / diff, axis=-1)
        return f0, w

    # -- chart at infinity ------------------------------------------------

    def evaluate_at_infinity_chart(self, w):
        """rho~(w) with omega = rho~(w) dw in the chart w = 1/z."""
        wa = np.asarray(w, dtype=complex)
        out = -np.sum(self._residues * self._locations / (1.0 - self._locations * wa[..., None]), axis=-1)
        return complex(out) if np.ndim(w) == 0 else out

    def potential_at_infinity_chart(self, w):
        wa = np.asarray(w, dtype=complex)
        out = np.sum(self._residues * np.log(np.abs(1.0 - self._locations * wa[..., None]) ** 2), axis=-1)
        return float(out) if np.ndim(w) == 0 else out

    # -- residues and zeros -----------------------------------------------

    def contour_residue(self, center: complex, radius: float, n: int = 256) -> complex:
        """(1/2 pi i) times the integral of omega over |z - center| = radius.

        Trapezoid rule on ``n`` nodes; the contour must isolate exactly one
        pole, with no other pole inside twice the radius.
        """
        center = complex(center)
        d = np.abs(self._locations - center)
        inside = np.count_nonzero(d < radius)
        near = np.count_nonzero(d < 2 * radius)
        if inside != 1 or near != 1:
            raise AmbiguousContour(
                f"circle |z-{center}|={radius} encloses {inside} poles ({near} within twice the radius)"
            )
        if np.any(np.abs(d - radius) < 1e-3 * radius):
            raise AmbiguousContour("a pole lies on the contour")
        e = np.exp(2j * np.pi * np.arange(n) / n)
        z = center + radius * e
        return complex(np.mean(self.evaluate(z) * radius * e))

    def numerator_coefficients(self) -> np.ndarray:
        """Coefficients (highest degree first) of N(zeta) in the rescaled chart.

        zeta = (z - c) / D with c the centroid and D the diameter of the pole
        set.  The degree m-1 coefficient equals the residue sum and is set to
        zero exactly; the result has length m - 1.
        """
        beta = self._scaled_locations()
        m = self.n_poles
        rows = []
        for k in range(m):
            rows.append(self._residues[k] * np.poly(np.delete(beta, k)).astype(complex))
        coefs = np.array([_csum(col) for col in np.array(rows).T])
        return coefs[1:]

    def _scaled_locations(self) -> np.ndarray:
        c = self._locations.mean()
        return (self._locations - c) / self.diameter

    def zeros(self) -> list[ZeroRecord]:
        if self._zeros is None:
            object.__setattr__(self, "_zeros", tuple(_find_zeros(self)))
        return list(self._zeros)


def _symmetrize(residues: Sequence[float]) -> list[float]:
    res = [float(r) for r in residues]
    total = math.fsum(res)
    res = [r - total / len(res) for r in res]
    total = math.fsum(res)
    if total != 0.0:
        k = max(range(len(res)), key=lambda i: abs(res[i]))
        res[k] -= total
    return res


def _find_zeros(form: RationalOneForm) -> list[ZeroRecord]:
    m = form.n_poles
    coefs = form.numerator_coefficients()
    scale = np.abs(coefs).max()
    lead = 0
    while lead < len(coefs) and abs(coefs[lead]) <= LEADING_COEF_TOL * scale:
        lead += 1
    coefs = coefs[lead:]
    degree = len(coefs) - 1
    records: list[ZeroRecord] = []
    if degree >= 1:
        roots = np.roots(coefs)
        if roots.size != degree or not np.all(np.isfinite(roots)):
            raise RootFindingFailure("companion-matrix eigenvalues did not return a full root set")
        roots = _polish(coefs, roots)
        c = form.locations.mean()
        for zeta, mult in _cluster_roots(coefs, roots):
            records.append(ZeroRecord(complex(c + form.diameter * zeta), mult))
    at_inf = (m - 2) - degree
    if at_inf > 0:
        records.append(ZeroRecord(INFINITY, at_inf))
    return records


def _polish(coefs: np.ndarray, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    dcoefs = np.polyder(coefs)
    out = roots.copy()
    for i, z in enumerate(out):
        for _ in range(steps):
            f = np.polyval(coefs, z)
            df = np.polyval(dcoefs, z)
            if df == 0:
                break
            z_new = z - f / df
            if abs(np.polyval(coefs, z_new)) < abs(f):
                z = z_new
            else:
                break
        out[i] = z
    return out


def _groups(roots: np.ndarray, tol: float) -> list[list[int]]:
    parent = list(range(len(roots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i):
            if abs(roots[i] - roots[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(roots)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _is_multiple_root(coefs: np.ndarray, center: complex, k: int) -> bool:
    scale = np.sum(np.abs(coefs)) * max(1.0, abs(center)) ** (len(coefs) - 1)
    deriv = coefs
    for j in range(k):
        if abs(np.polyval(deriv, center)) > 1e-9 * scale * math.factorial(j):
            return False
        deriv = np.polyder(deriv)
    return True


def _cluster_roots(coefs: np.ndarray, roots: np.ndarray) -> list[tuple[complex, int]]:
    # A k-fold root splits by ~eps**(1/k) under rounding, so tight clustering
    # alone misses multiplicities >= 2; loose candidates are kept only if the
    # derivatives up to order k-1 vanish at the cluster mean.
    out = []
    for group in _groups(roots, LOOSE_CLUSTER_TOL):
        center = complex(np.mean(roots[group]))
        if len(group) == 1 or _is_multiple_root(coefs, center, len(group)):
            out.append((center, len(group)))
            continue
        sub = roots[group]
        for tight in _groups(sub, ZERO_CLUSTER_TOL):
            out.append((complex(np.mean(sub[tight])), len(tight)))
    out.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12)))
    return out


def build_form(poles: Sequence[PoleSpec]) -> RationalOneForm:
    """Unique rational 1-form on the sphere with the given simple poles."""
    return RationalOneForm(tuple(poles))


def form_from_pairs(pairs) -> RationalOneForm:
    """Convenience constructor from (location, residue) pairs."""
    return build_form([PoleSpec(loc, res) for loc, res in pairs])
