import math

import numpy as np
import pytest

from porcupine.spectrum import enumerate_orbits, gap_estimate
from porcupine.thermo import (phase_transition, pressure, pressure_curve,
                              subgradient_check)

LOG_BETA = math.log(1.2)


@pytest.mark.parametrize("t", [-2.0, -0.5, 0.0, 0.7])
def test_length_one_pressure_closed_form(pair, t):
    want = math.log(1.2 ** -t + 0.5 ** -t + 0.38 ** -t)
    assert pressure(pair, t, 1) == pytest.approx(want, rel=1e-12)


def test_pressure_at_zero_counts_orbits(pair):
    for n in (4, 8, 12):
        assert pressure(pair, 0.0, n) == pytest.approx(math.log(2 ** n + 1) / n, rel=1e-12)


def test_pressure_convex_and_above_repeller_line(pair):
    c = pressure_curve(pair, -6.0, 2.0, 160, 10)
    assert c.second_differences().min() >= -1e-9
    for t, v in zip(c.t_grid, c.values):
        if t <= 0:
            assert v >= -t * LOG_BETA - 1e-12


def test_repeller_slope_far_left(pair):
    c = pressure_curve(pair, -8.0, -7.0, 20, 12)
    assert max(abs(s + LOG_BETA) for s in c.slopes) < 2e-4


def test_transition_frozen(pair):
    k = phase_transition(pair, 12)
    assert k.detected
    assert k.D_minus == pytest.approx(-LOG_BETA)
    assert k.t_Q == pytest.approx(-1.6387, abs=2e-3)
    assert k.jump == pytest.approx(0.2741, abs=2e-3)
    assert k.in_bound


def test_transition_point_stable_in_n(pair):
    tq = [phase_transition(pair, n).t_Q for n in (8, 10, 12)]
    assert max(tq) - min(tq) < 0.1


def test_subgradient_inequality(pair):
    for t in (-3.0, -1.0, 0.0, 0.5):
        rep = subgradient_check(pair, t, 10)
        assert rep.ok
        assert 0.0 < rep.dominant_weight <= 1.0


def test_curve_json_layout(pair):
    d = pressure_curve(pair, -3.0, 1.0, 16, 8).to_dict()
    assert list(d) == ["n", "t_grid", "values", "slopes", "kink", "gap", "meta"]
    assert list(d["kink"])[:3] == ["t_Q", "D_minus", "D_plus"]
    assert d["gap"]["beta_tilde_n"] == pytest.approx(gap_estimate(pair, 8).beta_tilde_n)
    assert len(d["slopes"]) == 16


def test_pressure_matches_direct_sum(pair):
    t, n = -1.3, 9
    m = enumerate_orbits(pair, n)[n].multiplier
    direct = math.log(np.sum(m ** -t)) / n
    assert pressure(pair, t, n) == pytest.approx(direct, rel=1e-12)
