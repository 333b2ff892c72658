import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hcmu import (
    INFINITY,
    ConicalMax,
    Cusp,
    SingularityPlan,
    balance_residues,
    check_plan,
    realize_on_sphere,
    saddle_budget,
)
from hcmu.errors import InvalidPlan, LambdaMismatch, NoMaxima, SaddleCountMismatch, SynthesisUnsupported


# -- brute-force oracle: plain arithmetic, exact fractions, no library calls -------


def oracle(genus, cusp_residues, conical_alphas, saddle_alphas, n_smooth):
    """(feasible, S, Lambda) straight from the counting condition and the residue balance."""
    I = len(cusp_residues)
    L = len(saddle_alphas)
    J = L + len(conical_alphas)
    S = sum(saddle_alphas) - I - J + (2 - 2 * genus)
    if S < 0 or I == 0:
        return False, S, None
    weight = S + sum(conical_alphas)
    if weight == 0:
        return False, S, None
    if n_smooth != S:
        return False, S, None
    Lam = -sum(cusp_residues) / weight
    return (True if genus == 0 else None), S, Lam


def _plan(genus, cusps, conical, saddles, n_smooth):
    pts = iter(range(100))
    return SingularityPlan(
        genus=genus,
        cusps=tuple(Cusp(next(pts), float(r)) for r in cusps),
        conical_maxima=tuple(ConicalMax(next(pts), float(a)) for a in conical),
        smooth_maxima=tuple(next(pts) for _ in range(n_smooth)),
        saddles=tuple(saddles),
    )


def _enumerate():
    alphas = [Fraction(1, 2), Fraction(2), Fraction(3)]
    for genus in (0, 1):
        for I in range(0, 5):
            for n_con in range(0, 5 - I):
                for n_sad in range(0, 5 - I - n_con):
                    for n_smooth in range(0, 5 - I - n_con - n_sad):
                        for con in itertools.combinations_with_replacement(alphas, n_con):
                            # saddle angle factors are integers
                            for sad in itertools.combinations_with_replacement([2, 3], n_sad):
                                cusps = [Fraction(k + 1, 3) for k in range(I)]
                                yield genus, cusps, list(con), list(sad), n_smooth


def test_oracle_agrees_with_checker():
    n = 0
    for genus, cusps, con, sad, n_smooth in _enumerate():
        feasible, S, Lam = oracle(genus, cusps, con, sad, n_smooth)
        plan = _plan(genus, cusps, con, sad, n_smooth)
        rep = check_plan(plan)
        assert rep.S == S == saddle_budget(plan)
        assert rep.feasible == feasible, (genus, cusps, con, sad, n_smooth, rep.diagnostics)
        if feasible is not False:
            assert rep.Lambda == pytest.approx(float(Lam), rel=1e-14)
        n += 1
    assert n > 500


def test_saddle_budget_examples():
    assert saddle_budget(SingularityPlan(cusps=(Cusp(0, 1),))) == 1
    assert saddle_budget(SingularityPlan(genus=1, cusps=(Cusp(0, 1),))) == -1
    assert saddle_budget(SingularityPlan(cusps=(Cusp(0, 1),), saddles=(2,))) == 2


@pytest.mark.parametrize(
    "plan, Lam, amax",
    [
        (SingularityPlan(cusps=(Cusp(0, 1 / 3),), smooth_maxima=(1,)), -1 / 3, 2 * math.pi),
        (SingularityPlan(cusps=(Cusp(0, 1 / 6),), conical_maxima=(ConicalMax(1, 0.5),)), -1 / 3, math.pi),
        (SingularityPlan(cusps=(Cusp(0, 2 / 3),), smooth_maxima=(1, 2), saddles=(2,)), -1 / 3, 4 * math.pi),
    ],
)
def test_balance_examples(plan, Lam, amax):
    rep = balance_residues(plan)
    assert rep.Lambda == pytest.approx(Lam, rel=1e-15)
    assert rep.alpha_max == pytest.approx(amax, rel=1e-15)
    assert rep.feasible is True
    assert abs(math.fsum(r for _, r, _ in rep.residues)) < 1e-15


def test_balance_errors():
    with pytest.raises(NoMaxima):
        # three cusps and a saddle of angle factor 2: S = 0, no conical maxima
        balance_residues(SingularityPlan(cusps=(Cusp(0, 1), Cusp(1, 1), Cusp(2, 1)), saddles=(2,)))
    with pytest.raises(SaddleCountMismatch):
        balance_residues(SingularityPlan(cusps=(Cusp(0, 1),), smooth_maxima=(1, 2)))


def test_cusp_only_plan_reports_no_maxima():
    rep = check_plan(SingularityPlan(cusps=(Cusp(0, 1),)))
    assert rep.feasible is False
    assert [d.code for d in rep.diagnostics][0] == "NoMaxima"
    with pytest.raises(LambdaMismatch):
        balance_residues(SingularityPlan(cusps=(Cusp(0, 1 / 3),), smooth_maxima=(1,), Lambda=-0.5))


def test_lambda_supplied_consistent():
    rep = balance_residues(SingularityPlan(cusps=(Cusp(0, 1 / 3),), smooth_maxima=(1,), Lambda=-1 / 3))
    assert rep.feasible


def test_genus_one_is_unknown_not_synthesized():
    plan = SingularityPlan(genus=1, cusps=(Cusp(0, 1),), saddles=(3,), smooth_maxima=(1,))
    rep = check_plan(plan)
    assert rep.S == 1 and rep.feasible is None
    assert any(d.code == "SynthesisUnsupported" for d in rep.diagnostics)
    with pytest.raises(SynthesisUnsupported):
        realize_on_sphere(plan)


def test_invalid_plans():
    with pytest.raises(InvalidPlan):
        SingularityPlan(cusps=(Cusp(0, -1),))
    with pytest.raises(InvalidPlan):
        SingularityPlan(conical_maxima=(ConicalMax(0, 1.0),))
    with pytest.raises(InvalidPlan):
        SingularityPlan(saddles=(1,))
    with pytest.raises(InvalidPlan):
        SingularityPlan(cusps=(Cusp(0, 1),), smooth_maxima=(0,))


def test_realize_examples():
    r = realize_on_sphere(SingularityPlan(cusps=(Cusp(0, 1 / 3),), smooth_maxima=(1,)))
    assert r.saddles == [] and not r.warnings
    r = realize_on_sphere(SingularityPlan(cusps=(Cusp(0, 2 / 3),), smooth_maxima=(1, 2), saddles=(2,)))
    (z,) = r.saddles
    assert z.multiplicity == 1 and abs(z.location - 4 / 3) < 1e-12
    r = realize_on_sphere(SingularityPlan(cusps=(Cusp(0, 2 / 3),), smooth_maxima=(1, -1), saddles=(2,)))
    (z,) = r.saddles
    assert z.location is INFINITY and z.multiplicity == 1


def test_saddle_order_mismatch_is_a_warning():
    # ask for a saddle of angle 6pi plus conical maxima; the realized zeros are simple
    plan = SingularityPlan(
        cusps=(Cusp(0, 1),),
        conical_maxima=(ConicalMax(1, 0.5), ConicalMax(2j, 0.5)),
        smooth_maxima=(3,),
        saddles=(3,),
    )
    r = realize_on_sphere(plan)
    assert r.saddle_orders == [1, 1]
    assert any(w.startswith("SaddleOrderMismatch") for w in r.warnings)


@st.composite
def feasible_plans(draw):
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    I = draw(st.integers(1, 3))
    con = [float(a) for a in draw(st.lists(st.sampled_from([0.5, 1.5, 2.0, 3.0]), max_size=2))]
    sad = draw(st.lists(st.integers(2, 4), max_size=2))
    S = sum(sad) - I - len(sad) - len(con) + 2
    if S < 0 or S + sum(con) == 0:
        S = None
    n = I + len(con) + (S or 0)
    while True:
        locs = rng.uniform(-2, 2, n) + 1j * rng.uniform(-2, 2, n)
        if n < 2 or (np.abs(locs[:, None] - locs[None]) + 9 * np.eye(n)).min() > 0.3:
            break
    locs = iter(locs.tolist())
    plan = SingularityPlan(
        cusps=tuple(Cusp(next(locs), float(rng.uniform(0.1, 2))) for _ in range(I)),
        conical_maxima=tuple(ConicalMax(next(locs), a) for a in con),
        smooth_maxima=tuple(next(locs) for _ in range(S or 0)),
        saddles=tuple(sad),
    )
    return plan, S


@settings(max_examples=60, deadline=None)
@given(feasible_plans())
def test_realized_divisor_matches_counting(arg):
    plan, S = arg
    if S is None:
        assert check_plan(plan).feasible is False
        return
    r = realize_on_sphere(plan)
    assert sum(z.multiplicity for z in r.saddles) == S + plan.I + (plan.J - plan.L) - 2
    assert sum(z.multiplicity for z in r.saddles) == sum(a - 1 for a in plan.saddles)
