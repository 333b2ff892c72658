"""HCMU metrics with cusps and cone points on the Riemann sphere."""

from .curvature import (
    CurvatureField,
    CurvatureParams,
    InteriorPoint,
    lambda_from_mu,
    make_params,
    mu_from_lambda,
    sigma,
    sigma_inverse,
    sigma_prime,
)
from .errors import *  # noqa: F401,F403
from .existence import (
    ConicalMax,
    Cusp,
    ExistenceReport,
    Realization,
    SingularityPlan,
    balance_residues,
    check_plan,
    realize_on_sphere,
    saddle_budget,
)
from .metric import MetricField, SingularityKind, SingularityRecord, classify, make_metric
from .oneform import INFINITY, PoleSpec, RationalOneForm, ZeroRecord, build_form, form_from_pairs
from .verify import (
    QuadratureSettings,
    Tolerances,
    check_curvature_pde,
    check_cusp,
    check_gradient,
    closed_form_Cn,
    energy_table,
    estimate_cone_angle,
    integrate_Cn,
    run_audit,
)
