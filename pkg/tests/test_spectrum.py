import math

import numpy as np
import pytest
from scipy.optimize import brentq

from porcupine import SeqSpec, Word
from porcupine.itinerary import Interval
from porcupine.spectrum import (distortion_profile, enumerate_orbits, finite_time_exponent,
                                fixed_points, gap_estimate, near_zero_negative,
                                near_zero_positive, orbits_to_csv, scan_roots,
                                spectrum_sample)
from porcupine.symbolic import all_words

ORACLE_POINTS = 100_001


def oracle_fixed_points(pair, word):
    """Sign scan on a 1e5 grid, exact zeros kept, brentq on every sign change."""
    xs = np.linspace(0.0, 1.0, ORACLE_POINTS)
    g = pair.compose_value(word, xs) - xs
    roots = list(xs[g == 0.0])
    s = np.sign(g)
    idx = np.nonzero((s[:-1] * s[1:]) < 0)[0]
    fn = lambda x: pair.compose_value(word, float(x)) - float(x)  # noqa: E731
    roots += [brentq(fn, xs[i], xs[i + 1], xtol=1e-15) for i in idx]
    return sorted(roots)


@pytest.fixture(scope="module")
def table12(pair):
    return enumerate_orbits(pair, 12, threads=1)


def test_enumeration_matches_brute_force_oracle(pair):
    table = enumerate_orbits(pair, 8, threads=1)
    for n in range(1, 9):
        t = table[n]
        for code, w in enumerate(all_words(n)):
            mine = np.sort(t.fix[t.codes == code])
            ref = oracle_fixed_points(pair, w)
            assert len(mine) == len(ref), str(w)
            assert np.max(np.abs(mine - np.array(ref)), initial=0.0) <= 1e-8, str(w)


def test_counts_per_length(table12):
    # one fixed point per word, plus the second fixed point 1 of 0^n
    for n in range(1, 13):
        assert len(table12[n].fix) == 2 ** n + 1


def test_length_one_orbits(pair, table12):
    t = table12[1]
    got = sorted(zip(t.fix.tolist(), t.multiplier.tolist()))
    want = sorted([(0.0, 1.2), (1.0, 0.5), (0.38 / 1.38, 0.38)])
    for (x, m), (x2, m2) in zip(got, want):
        assert x == pytest.approx(x2, abs=1e-12)
        assert m == pytest.approx(m2, rel=1e-9)


def test_excluded_set(table12):
    for n in (1, 5, 12):
        t = table12[n]
        ex = t.excluded
        assert ex.sum() == 1
        i = int(np.nonzero(ex)[0][0])
        assert t.codes[i] == 0 and t.fix[i] == 0.0
        assert t.exponent[i] == pytest.approx(math.log(1.2))


def test_thread_independence(pair):
    a = enumerate_orbits(pair, 9, threads=1)
    b = enumerate_orbits(pair, 9, threads=4)
    for n in range(1, 10):
        assert np.array_equal(a[n].codes, b[n].codes)
        assert np.array_equal(a[n].fix, b[n].fix)
        assert np.array_equal(a[n].deriv, b[n].deriv)


def test_scan_roots_finds_pair_inside_one_cell():
    # x = 0 is a grid root; 0.3 and 0.3001 share one cell of the coarse grid
    fn = lambda x: x + x * (x - 0.3) * (x - 0.3001)  # noqa: E731
    roots, cells = scan_roots(fn, grid=256, refine=False)
    assert roots == [0.0] and not cells
    roots, cells = scan_roots(fn, grid=256)
    assert roots == [0.0]
    mids = sorted(0.5 * (a + b) for a, b in cells)
    assert len(mids) == 2
    assert mids[0] == pytest.approx(0.3, abs=1e-4)
    assert mids[1] == pytest.approx(0.3001, abs=1e-4)


def test_fixed_points_word(pair):
    orbs = fixed_points(pair, "0")
    assert [o.fix for o in orbs] == [0.0, 1.0]
    assert [o.stability for o in orbs] == ["repelling", "attracting"]


def test_finite_time_exponent(pair):
    assert finite_time_exponent(pair, "0", 0.0, 10) == pytest.approx(math.log(1.2))
    assert finite_time_exponent(pair, "1", 0.7, 5) == pytest.approx(math.log(0.38))
    s = SeqSpec(right_tail=Word((0,)))
    assert finite_time_exponent(pair, s, 1.0, 7) == pytest.approx(math.log(0.5))


def test_gap_frozen(pair):
    g = gap_estimate(pair, 12)
    assert g.margin == pytest.approx(0.175585894, abs=1e-8)
    assert str(g.argmax_word) == "000000000001"
    hist = [b for _, b in g.history]
    assert all(b2 >= b1 for b1, b2 in zip(hist, hist[1:]))


def test_spectrum_sample_shape(pair):
    ents = spectrum_sample(pair, 8)
    ex = [e.exponent for e in ents]
    assert min(ex) == pytest.approx(math.log(0.38))
    assert any(abs(e - math.log(0.5)) < 1e-12 for e in ex)
    assert max(ex) == pytest.approx(math.log(1.2))
    assert sum(e.excluded for e in ents) == 8
    csv_text = orbits_to_csv(ents[:3])
    assert csv_text.splitlines()[0] == "word,fix,multiplier,exponent,stability,excluded"


def test_distortion_profile(pair):
    prof = distortion_profile(pair, Interval(0.2, 0.25), 40)
    assert prof.ratio[0] == 1.0
    assert all(r >= 1.0 for r in prof.ratio)
    # distortion along f0-orbits stays bounded
    assert max(prof.ratio) < 10.0


def test_near_zero_negative(pair):
    orb = near_zero_negative(pair, 0.05)
    assert -0.05 < orb.exponent < 0
    assert orb.residual <= 1e-10
    xs = np.linspace(0, 1, 4097)
    assert np.abs(pair.compose_deriv(orb.word, xs)).max() < 1


def test_near_zero_positive(pair):
    orb = near_zero_positive(pair, 0.05)
    assert 0 < orb.exponent < 0.05
    assert orb.residual <= 1e-10
