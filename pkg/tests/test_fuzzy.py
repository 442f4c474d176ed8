import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from roundabout_ftc.fuzzy import (ET_RULES, UD_RULES, FuzzyVariable, PiecewiseLinearMF, RuleBase,
                                  TrapezoidMF, ZeroArea, centroid, default_membership_set,
                                  defuzzify, evaluate_mf, infer, load_membership,
                                  membership_from_dict, membership_to_dict, safe_centroid,
                                  save_membership)

MS = default_membership_set()
QL = MS.QL.terms


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def quad_centroid(mf, n=400_001):
    # independent oracle: dense trapezoid-rule quadrature of np.interp
    xs = np.linspace(*mf.domain, n)
    bx, bg = zip(*mf.breakpoints)
    gs = np.interp(xs, bx, bg)
    return _trapezoid(xs * gs, xs) / _trapezoid(gs, xs)


# -- membership evaluation ---------------------------------------------------

@pytest.mark.parametrize("x, short, medium, long", [
    (0, 1.0, 0.0, 0.0), (4, 0.5, 0.0, 0.0), (6, 0.25, 1 / 3, 0.0), (8, 0.0, 2 / 3, 0.0),
    (10, 0.0, 1.0, 0.0), (12, 0.0, 2 / 3, 0.0), (16, 0.0, 0.0, 0.5), (20, 0.0, 0.0, 1.0),
])
def test_queue_length_terms(x, short, medium, long):
    assert evaluate_mf(QL["short"], x) == pytest.approx(short, abs=1e-12)
    assert evaluate_mf(QL["medium"], x) == pytest.approx(medium, abs=1e-12)
    assert evaluate_mf(QL["long"], x) == pytest.approx(long, abs=1e-12)


def test_clamps_outside_domain():
    assert evaluate_mf(QL["short"], -5) == 1.0
    assert evaluate_mf(QL["long"], 99) == 1.0


def test_boundary_identity():
    mf = PiecewiseLinearMF(((0.0, 0.3), (5.0, 0.9), (10.0, 0.2)), (0.0, 10.0))
    assert mf(0.0) == 0.3 and mf(10.0) == 0.2


def test_rejects_bad_breakpoints():
    with pytest.raises(ValueError):
        PiecewiseLinearMF(((0.0, 0.0), (5.0, 1.5), (10.0, 0.0)), (0.0, 10.0))
    with pytest.raises(ValueError):
        PiecewiseLinearMF(((0.0, 0.0), (5.0, 1.0), (4.0, 0.0)), (0.0, 10.0))


# -- centroids ---------------------------------------------------------------

def test_et_centroids_exact():
    assert centroid(MS.ET.terms["short"]) == 2.5
    assert centroid(MS.ET.terms["long"]) == 12.5


def test_short_ql_centroid_matches_quadrature():
    # triangle 1 -> 0 on [0, 8]: centroid 8/3
    assert centroid(QL["short"]) == pytest.approx(8 / 3, abs=1e-12)
    assert centroid(QL["short"]) == pytest.approx(quad_centroid(QL["short"]), abs=1e-6)


def test_symmetric_trapezoid_centroid():
    mf = TrapezoidMF(2, 2, 5).to_piecewise((0.0, 10.0))
    assert centroid(mf) == pytest.approx(5.0, abs=1e-12)


def test_zero_area_raises_and_falls_back():
    mf = TrapezoidMF(1, 1, 50).to_piecewise((0.0, 10.0))
    with pytest.raises(ZeroArea):
        centroid(mf)
    assert safe_centroid(mf) == 10.0
    flat = PiecewiseLinearMF(((0.0, 0.0), (4.0, 0.0)), (0.0, 4.0))
    assert safe_centroid(flat) == 2.0


trap = st.builds(TrapezoidMF, st.floats(0, 10), st.floats(0.01, 10), st.floats(-5, 25))


@given(trap)
def test_centroid_agrees_with_quadrature(t):
    mf = t.to_piecewise((0.0, 20.0))
    if mf.area() < 1e-3:
        return
    assert centroid(mf) == pytest.approx(quad_centroid(mf), abs=1e-4)


@given(trap, st.floats(-10, 30))
def test_trapezoid_and_piecewise_agree(t, x):
    mf = t.to_piecewise((0.0, 20.0))
    assert mf(x) == pytest.approx(t.grade(min(max(x, 0.0), 20.0)), abs=1e-12)


# -- defuzzification and inference ------------------------------------------

def test_worked_defuzzification():
    assert defuzzify((0.408, 0.083), (2.5, 12.5)) == pytest.approx(4.19, abs=0.005)


def test_all_zero_grades_give_centroid_mean():
    assert defuzzify((0.0, 0.0), (2.5, 12.5)) == 7.5


def test_single_firing_term_returns_its_centroid():
    assert defuzzify((0.0, 0.7, 0.0), (0.1, 0.5, 0.9)) == 0.5


def test_rule_base_must_be_complete():
    with pytest.raises(ValueError):
        RuleBase(ET_RULES.rules[:-1]).check(MS.QL, MS.WT, MS.ET)


def test_infer_grades_use_min_then_max():
    res = infer(ET_RULES, MS.QL, 6.0, MS.WT, 5.0, MS.ET)
    g_ql = MS.QL.grades(6.0)
    g_wt = MS.WT.grades(5.0)
    expected_long = min(g_ql["medium"], g_wt["medium"])
    assert res.grades["long"] == pytest.approx(expected_long)
    assert 0.0 <= res.crisp <= 15.0


@given(st.floats(0, 20), st.floats(0, 100))
def test_compiled_matches_reference(ql, wt):
    assert MS.et_inference()(ql, wt) == infer(ET_RULES, MS.QL, ql, MS.WT, wt, MS.ET).crisp
    assert MS.ud_inference()(ql, wt) == infer(UD_RULES, MS.QL, ql, MS.WT, wt, MS.UD).crisp


@given(st.floats(-50, 200), st.floats(-50, 500))
def test_crisp_stays_in_output_domain(ql, wt):
    assert 0.0 <= MS.et_inference()(ql, wt) <= 15.0
    assert 0.0 <= MS.ud_inference()(ql, wt) <= 1.0


def test_variable_domain_mismatch():
    with pytest.raises(ValueError):
        FuzzyVariable("X", (0.0, 5.0), {"a": QL["short"]})


# -- documents ---------------------------------------------------------------

def test_json_round_trip(tmp_path):
    path = tmp_path / "mf.json"
    save_membership(MS, path)
    back = load_membership(path)
    for name, var in MS.variables().items():
        for term, mf in var.terms.items():
            assert back.variables()[name].terms[term].breakpoints == mf.breakpoints


@given(st.lists(trap, min_size=11, max_size=11))
def test_trapezoid_document_round_trip(traps):
    doc = {v: {} for v in ("QL", "WT", "ET", "UD")}
    names = [("QL", "short"), ("QL", "medium"), ("QL", "long"), ("WT", "short"),
             ("WT", "medium"), ("WT", "long"), ("ET", "short"), ("ET", "long"),
             ("UD", "low"), ("UD", "medium"), ("UD", "high")]
    for (v, t), tr in zip(names, traps):
        doc[v][t] = {"U": tr.U, "D": tr.D, "C": tr.C}
    again = membership_to_dict(membership_from_dict(json.loads(json.dumps(doc))))
    for v in doc:
        for t in doc[v]:
            for k in "UDC":
                assert math.isclose(again[v][t][k], doc[v][t][k], abs_tol=1e-12)
