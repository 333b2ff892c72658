import math

import numpy as np
import pytest

from hcmu import INFINITY, SingularityKind, check_plan, classify, form_from_pairs, make_metric, make_params
from hcmu.configs import REFERENCE
from hcmu.curvature import CurvatureParams
from hcmu.errors import EvaluationAtPole
from hcmu.verify import regular_points


def test_football_midpoint(football):
    assert football.field.K(0.5) == pytest.approx(0.5, abs=1e-14)
    assert football.conformal_factor(0.5) == pytest.approx(8.0, rel=1e-13)
    assert football.phi(0.5) == pytest.approx(0.5 * math.log(8), rel=1e-13)


def test_positivity(metrics):
    for m in metrics.values():
        z = regular_points(m, 2500, 1e-3, seed=5, pad=3.0)
        assert np.all(m.conformal_factor(z) > 0)


def test_zero_of_factor_at_saddle(metrics):
    m = metrics["B"]
    (z,) = m.form.zeros()
    # the float location of the zero is off by an ulp, hence not exactly 0
    assert m.conformal_factor(z.location) < 1e-28


def test_phi_reflection(metrics):
    m = metrics["C"]
    z = np.array([0.3 + 0.8j, -1.2 + 0.1j, 2.5 - 3j])
    assert np.allclose(m.phi(z.conjugate()), m.phi(z), rtol=1e-14, atol=0)


def test_circle_length_collapses_at_cusp(football):
    # e^{2phi} ~ c / (r^2 ln^2 r): phi itself blows up, phi + ln r = ln(length / 2pi) goes to -inf
    r = np.array([1e-2, 1e-5, 1e-10])
    phi = football.phi(r)
    assert np.all(np.diff(phi) > 0)
    assert np.all(np.diff(phi + np.log(r)) < 0)


def test_evaluation_at_pole(football):
    with pytest.raises(EvaluationAtPole):
        football.conformal_factor(0.0)


def test_classification_dictionary():
    p = CurvatureParams(-1.0, -1 / 3)
    form = form_from_pairs([(0, 1.0), (1, -1 / 3), (2, -2 / 3)])
    recs = {complex(r.location) if r.location is not INFINITY else "inf": r for r in classify(form, p)}
    assert recs[0j].kind is SingularityKind.CUSP and recs[0j].K_limit == -1.0 and recs[0j].angle_factor is None
    assert recs[1 + 0j].kind is SingularityKind.SMOOTH_MAX and recs[1 + 0j].angle_factor == 1.0
    assert recs[1 + 0j].K_limit == 2.0
    assert recs[2 + 0j].kind is SingularityKind.CONICAL_MAX
    assert recs[2 + 0j].angle_factor == pytest.approx(2.0, rel=1e-15)
    (saddle,) = [r for r in recs.values() if r.kind is SingularityKind.CONICAL_SADDLE]
    assert saddle.angle_factor == 2.0 and saddle.order == 1


def test_smooth_max_tolerance():
    p = CurvatureParams(-1.0, -1 / 3)
    lam = -1 / 3
    for delta, kind in ((1e-11, SingularityKind.SMOOTH_MAX), (1e-7, SingularityKind.CONICAL_MAX)):
        form = form_from_pairs([(0, -lam * (1 + delta)), (1, lam * (1 + delta))])
        assert classify(form, p)[1].kind is kind


@pytest.mark.parametrize("name", list(REFERENCE))
def test_completeness_and_angle_bookkeeping(metrics, name):
    m = metrics[name]
    recs = classify(m.form, m.params)
    assert len(recs) == m.form.n_poles + len(m.form.zeros())
    maxima = [r for r in recs if r.kind in (SingularityKind.SMOOTH_MAX, SingularityKind.CONICAL_MAX)]
    report = check_plan(REFERENCE[name])
    assert 2 * math.pi * math.fsum(r.angle_factor for r in maxima) == pytest.approx(report.alpha_max, rel=1e-14)


def test_saddle_records(metrics):
    for name in ("B", "symmetric"):
        m = metrics[name]
        mu = m.params.mu
        for r in classify(m.form, m.params):
            if r.kind is SingularityKind.CONICAL_SADDLE:
                assert mu < r.K_limit < -2 * mu
                if r.location is not INFINITY:
                    scale = abs(m.field.grad_K(r.location + 0.1))
                    assert abs(m.field.grad_K(r.location)) <= 1e-8 * scale


@pytest.mark.parametrize("name", ["A", "B"])
def test_smooth_max_is_regular(metrics, name):
    m = metrics[name]
    k = m.form.pole_index(1.0)
    theta = 2 * np.pi * np.arange(64) / 64
    osc, centre = [], []
    for r in (1e-2, 1e-3, 1e-4, 1e-5):
        _, ls = m.log_scaled_factor_near_pole(k, np.full(64, math.log(r)), theta)
        f = np.exp(ls - 2 * math.log(r))  # e^{2 phi} on the circle
        osc.append(f.max() - f.min())
        centre.append(f.mean())
    assert all(a > b for a, b in zip(osc, osc[1:])) and osc[-1] < 1e-3 * centre[-1]
    assert abs(centre[-1] - centre[-2]) < 1e-3 * centre[-1]


def test_infinity_chart_covariance(metrics):
    m = metrics["A"]
    z = np.array([3 + 4j, -5 + 1j, 2 - 7j])
    w = 1 / z
    K_w, lf_w = m.log_conformal_factor_at_infinity_chart(w)
    assert np.allclose(K_w, m.field.K(z), rtol=1e-13)
    assert np.allclose(lf_w, m.log_conformal_factor(z) + 4 * np.log(np.abs(z)), rtol=0, atol=1e-12)


def test_a0_family_shifts_curvature():
    form = form_from_pairs([(0, 1 / 3), (1, -1 / 3)])
    K = [make_metric(form, make_params(form, Lambda=-1 / 3, A0=a)).field.K(0.5) for a in (-1.0, 0.0, 1.0)]
    assert K[0] > K[1] > K[2]
