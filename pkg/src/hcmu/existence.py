"""Feasibility of a singularity plan and its realization as a 1-form on the sphere.

A plan asks for cusps (with chosen positive residues), conical maxima with
angle factors alpha != 1, smooth maxima, and saddle orders.  With

    I = #cusps,  L = #saddles,  J = L + #conical maxima,  chi = 2 - 2 genus,

the number of smooth maxima is forced to S = sum(saddle alphas) - I - J + chi,
and the residue sum identity forces every maximum residue to be a multiple
of one negative constant Lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InfeasiblePlan,
    InvalidPlan,
    LambdaMismatch,
    NegativeSaddleBudget,
    NoCusps,
    NoMaxima,
    SaddleCountMismatch,
    SynthesisUnsupported,
    ZeroPoleCollision,
)
from .oneform import COLLISION_TOL, PoleSpec, RationalOneForm, ZeroRecord, build_form

LAMBDA_AGREEMENT = 1e-10
ALPHA_ONE_TOL = 1e-9


@dataclass(frozen=True)
class Cusp:
    location: complex
    residue: float


@dataclass(frozen=True)
class ConicalMax:
    location: complex
    alpha: float


@dataclass(frozen=True)
class SingularityPlan:
    genus: int = 0
    cusps: tuple[Cusp, ...] = ()
    conical_maxima: tuple[ConicalMax, ...] = ()
    smooth_maxima: tuple[complex, ...] = ()
    saddles: tuple[int, ...] = ()  # requested angle factors, integers >= 2
    Lambda: float | None = None  # optional; must agree with the balance

    def __post_init__(self):
        object.__setattr__(self, "cusps", tuple(Cusp(complex(c.location), float(c.residue)) for c in self.cusps))
        object.__setattr__(
            self, "conical_maxima", tuple(ConicalMax(complex(c.location), float(c.alpha)) for c in self.conical_maxima)
        )
        object.__setattr__(self, "smooth_maxima", tuple(complex(z) for z in self.smooth_maxima))
        if isinstance(self.genus, bool) or int(self.genus) != self.genus or self.genus < 0:
            raise InvalidPlan(f"genus must be a nonnegative integer, got {self.genus!r}")
        object.__setattr__(self, "genus", int(self.genus))
        for c in self.cusps:
            if not (c.residue > 0 and math.isfinite(c.residue)):
                raise InvalidPlan(f"cusp residue must be positive, got {c.residue}")
        for c in self.conical_maxima:
            if not (c.alpha > 0 and math.isfinite(c.alpha)):
                raise InvalidPlan(f"conical angle factor must be positive, got {c.alpha}")
            if abs(c.alpha - 1.0) <= ALPHA_ONE_TOL:
                raise InvalidPlan("angle factor 1 is a smooth maximum, not a conical one")
        saddles = []
        for a in self.saddles:
            if isinstance(a, bool) or float(a) != int(a) or int(a) < 2:
                raise InvalidPlan(f"saddle angle factors must be integers >= 2, got {a!r}")
            saddles.append(int(a))
        object.__setattr__(self, "saddles", tuple(saddles))
        locs = self.locations
        if locs:
            arr = np.array(locs)
            diam = max(float(np.abs(arr[:, None] - arr[None, :]).max()), 1.0)
            for i in range(len(locs)):
                for j in range(i):
                    if abs(locs[i] - locs[j]) <= COLLISION_TOL * diam:
                        raise InvalidPlan(f"declared locations {j} and {i} coincide at {locs[i]}")

    @property
    def locations(self) -> list[complex]:
        return (
            [c.location for c in self.cusps]
            + [c.location for c in self.conical_maxima]
            + list(self.smooth_maxima)
        )

    @property
    def I(self) -> int:  # noqa: E743
        return len(self.cusps)

    @property
    def L(self) -> int:
        return len(self.saddles)

    @property
    def J(self) -> int:
        return self.L + len(self.conical_maxima)

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str


@dataclass
class ExistenceReport:
    S: int
    Lambda: float | None
    alpha_max: float | None
    feasible: bool | None  # None: arithmetic passes but synthesis is unsupported
    diagnostics: list[Diagnostic] = field(default_factory=list)
    residues: list[tuple[complex, float, str]] = field(default_factory=list)


def saddle_budget(plan: SingularityPlan) -> int:
    """S = sum of saddle angle factors - I - J + chi."""
    return sum(plan.saddles) - plan.I - plan.J + plan.euler_characteristic


_ERRORS = {
    "NegativeSaddleBudget": NegativeSaddleBudget,
    "NoCusps": NoCusps,
    "NoMaxima": NoMaxima,
    "SaddleCountMismatch": SaddleCountMismatch,
    "LambdaMismatch": LambdaMismatch,
}


def check_plan(plan: SingularityPlan) -> ExistenceReport:
    """Evaluate every feasibility condition; never raises on infeasibility."""
    S = saddle_budget(plan)
    diags: list[Diagnostic] = []
    if S < 0:
        diags.append(Diagnostic("NegativeSaddleBudget", f"S = {S} < 0"))
    if plan.I == 0:
        diags.append(Diagnostic("NoCusps", "at least one cusp is required"))
    weight = max(S, 0) + math.fsum(c.alpha for c in plan.conical_maxima)
    if (S >= 0 and weight == 0) or not (plan.smooth_maxima or plan.conical_maxima):
        diags.append(Diagnostic("NoMaxima", "no maxima to balance the positive cusp residues"))
    if S >= 0 and len(plan.smooth_maxima) != S:
        diags.append(
            Diagnostic("SaddleCountMismatch", f"plan lists {len(plan.smooth_maxima)} smooth maxima, S = {S}")
        )

    Lambda = alpha_max = None
    residues: list[tuple[complex, float, str]] = []
    if S >= 0 and weight > 0 and plan.I > 0:
        Lambda = -math.fsum(c.residue for c in plan.cusps) / weight
        alpha_max = 2 * math.pi * weight
        if plan.Lambda is not None and abs(plan.Lambda - Lambda) > LAMBDA_AGREEMENT * abs(Lambda):
            diags.append(Diagnostic("LambdaMismatch", f"supplied Lambda {plan.Lambda} != balanced {Lambda}"))
        residues += [(c.location, c.residue, "cusp") for c in plan.cusps]
        residues += [(c.location, Lambda * c.alpha, "conical_max") for c in plan.conical_maxima]
        residues += [(z, Lambda, "smooth_max") for z in plan.smooth_maxima]

    if diags:
        feasible: bool | None = False
    elif plan.genus > 0:
        feasible = None
        diags.append(Diagnostic("SynthesisUnsupported", "conditions on the 1-form are not checked for genus >= 1"))
    else:
        feasible = True
    return ExistenceReport(S, Lambda, alpha_max, feasible, diags, residues)


def balance_residues(plan: SingularityPlan) -> ExistenceReport:
    """Balanced residues for a plan; raises the first infeasibility found."""
    report = check_plan(plan)
    for d in report.diagnostics:
        if d.code in _ERRORS:
            raise _ERRORS[d.code](d.message)
    return report


@dataclass
class Realization:
    form: RationalOneForm
    saddles: list[ZeroRecord]
    report: ExistenceReport
    warnings: list[str] = field(default_factory=list)

    @property
    def saddle_orders(self) -> list[int]:
        return sorted(z.multiplicity for z in self.saddles)


def realize_on_sphere(plan: SingularityPlan) -> Realization:
    """Build omega from the balanced residues; zeros land where they land."""
    if plan.genus != 0:
        raise SynthesisUnsupported("only genus-0 plans can be realized")
    report = balance_residues(plan)
    if not report.feasible:
        raise InfeasiblePlan("; ".join(d.message for d in report.diagnostics))
    form = build_form([PoleSpec(loc, r) for loc, r, _ in report.residues])
    zeros = form.zeros()
    tol = COLLISION_TOL * form.diameter
    for zr in zeros:
        if not zr.at_infinity and np.min(np.abs(form.locations - zr.location)) <= tol:
            raise ZeroPoleCollision(f"realized zero at {zr.location} collides with a pole")
    warnings = []
    requested = sorted(a - 1 for a in plan.saddles)
    realized = sorted(z.multiplicity for z in zeros)
    if requested != realized:
        warnings.append(f"SaddleOrderMismatch: requested zero orders {requested}, realized {realized}")
    return Realization(form, zeros, report, warnings)
