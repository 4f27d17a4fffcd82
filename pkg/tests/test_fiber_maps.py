import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from porcupine import (CANONICAL, ConstructionError, ParameterError, ShapeControls,
                       derive_params, pair_from_dict, validate)
from porcupine.fiber_maps import KneeMap, bisect_monotone


def test_endpoints_and_slopes(pair):
    f0, f1 = pair.f0, pair.f1
    assert f0(0.0) == 0.0 and f0(1.0) == 1.0
    assert f0.deriv(0.0) == pytest.approx(1.2)
    assert f0.deriv(1.0) == pytest.approx(0.5)
    assert f1(1.0) == 0.0
    assert f1(0.0) == pytest.approx(0.38)
    assert pair.p_hat == pytest.approx(0.38 / 1.38)


def test_f0_is_integral_of_derivative(pair):
    # independent oracle: quadrature of the derivative
    for x in np.linspace(0.05, 0.95, 7):
        val, _ = quad(pair.f0.deriv, 0.0, x, limit=200, points=[0.02, 0.05, 0.5])
        assert pair.f0(x) == pytest.approx(val, abs=1e-9)


def test_inverse_matches_brentq(pair):
    for y in (0.01, 0.2, 0.5, 0.77, 0.99):
        x = brentq(lambda t: pair.f0(t) - y, 0.0, 1.0, xtol=1e-14)
        assert pair.f0.inverse(y) == pytest.approx(x, abs=1e-11)


def test_scalar_and_array_paths_agree(pair):
    xs = np.linspace(0.0, 1.0, 101)
    w = "0110100"
    arr = pair.compose_value(w, xs)
    for x, v in zip(xs, arr):
        assert pair.compose_value(w, float(x)) == v
    d_arr = pair.compose_deriv(w, xs)
    for x, d in zip(xs, d_arr):
        assert pair.compose_deriv(w, float(x)) == pytest.approx(d, rel=1e-14)


def test_derived_parameters_frozen(pair):
    p = pair.params
    assert p.N == 21
    assert p.a0 == pytest.approx(0.0803759398, abs=1e-9)
    assert p.b0 == pytest.approx(0.0919135338, abs=1e-9)
    assert p.a1 == pytest.approx(0.8188107924, abs=1e-9)
    assert p.b1 == pytest.approx(0.9032323665, abs=1e-9)
    assert p.alpha == pytest.approx(2.8697261951, abs=1e-9)
    assert pair.kappa == pytest.approx(1.0904959542, abs=1e-9)
    assert p.standing_ratio() == pytest.approx(1.5)


def test_fundamental_domain_is_f0_preimage_of_i0(pair):
    lo, hi = pair.fundamental_domain
    assert pair.f0(lo) == pytest.approx(hi, abs=1e-12)
    assert pair.f0(hi) == pytest.approx(pair.params.b0, abs=1e-12)
    assert hi == pytest.approx(pair.params.a0, abs=1e-12)


def test_validate_canonical(pair):
    rep = validate(pair)
    assert rep.all_pass
    for name in ("F0.i", "F0.ii", "F1.i", "F1.ii", "F01b", "F01c", "standing"):
        assert rep[name].margin > 0, name
    assert rep["F01a"].passed
    assert rep["F1.i"].margin == pytest.approx(0.62)
    assert rep["F0.i"].margin == pytest.approx(0.1450657, abs=1e-6)


def test_optional_condition_not_in_verdict(pair):
    rep = validate(pair)
    assert not rep["F_B"].passed
    assert "F_B" not in rep.failures


def test_broken_contraction_detected():
    rep = validate(pair_from_dict(dict(CANONICAL, c1=1.0)))
    assert rep.failures == ["F1.i"]


def test_broken_standing_inequality_detected():
    doc = {"beta": 2.0, "lambda": 0.5, "c1": 0.38, "shape_controls": {"plateau": 1.5}}
    rep = validate(pair_from_dict(doc))
    assert "standing" in rep.failures
    assert rep["standing"].margin < 0


def test_bad_parameters_raise():
    with pytest.raises(ParameterError):
        pair_from_dict({"beta": 1.2, "lambda": 0.5})
    with pytest.raises(ParameterError):
        pair_from_dict(dict(CANONICAL, shape_controls={"wiggle": 1}))
    with pytest.raises((ParameterError, ConstructionError)):
        derive_params(0.9, 0.5, 0.38)


def test_bisect_monotone():
    x = bisect_monotone(lambda t: t ** 3, 0.125, 0.0, 1.0)
    assert x == pytest.approx(0.5, abs=1e-11)


_PAIR = pair_from_dict(CANONICAL)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_f0_monotone_and_bounded_slopes(a, b):
    f0 = _PAIR.f0
    lo, hi = min(a, b), max(a, b)
    assert f0(lo) <= f0(hi)
    if hi - lo > 1e-9:
        slope = (f0(hi) - f0(lo)) / (hi - lo)
        assert 0.5 - 1e-9 <= slope <= 1.2 + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6))
def test_inverse_roundtrip(x):
    f0 = _PAIR.f0
    assert f0.inverse(f0(x)) == pytest.approx(x, abs=1e-11)


def test_knee_map_knot_order():
    with pytest.raises(ConstructionError):
        ShapeControls(plateau=1.1, head=0.5, head_ramp=0.4).knots(1.2, 0.5)
    xs, ds = ShapeControls().knots(1.2, 0.5)
    m = KneeMap(xs, ds)
    assert m(1.0) == pytest.approx(1.0, abs=1e-12)
    assert math.isclose(m.deriv(0.99), 0.5)
    assert math.isclose(m.deriv(0.01), 1.2)
