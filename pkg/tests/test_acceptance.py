"""The ten acceptance criteria at their stated tolerances, one test each.

Every test logs a single PASS/FAIL line; the lines are repeated in the
terminal summary.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from porcupine import (CANONICAL, SeqSpec, Word, canonical_pair, pair_from_dict, shift,
                       truncate, validate)
from porcupine.domains import (NONTRIVIAL, TRIVIAL, approximations, classify_fiber,
                               domain_at_depth, nontrivial_family)
from porcupine.itinerary import (Interval, band, chain_length_bound, fundamental, image,
                                 periodic_point_near, successor_chain, sweep)
from porcupine.skew3d import (P_POINT, Q_POINT, HorseshoeModel, code_point, itinerary,
                              lift_periodic, step, verify_cycle)
from porcupine.spectrum import (_cached, enumerate_orbits, fixed_points, gap_estimate,
                                near_zero_negative, near_zero_positive, spectrum_sample)
from porcupine.symbolic import all_words
from porcupine.thermo import phase_transition, pressure, pressure_curve

LOG_BETA = math.log(CANONICAL["beta"])


@pytest.fixture(scope="module")
def cf():
    return canonical_pair()


def random_seq(rng, core_max=8, tail_max=4):
    def w(lo, hi):
        return Word(tuple(rng.integers(0, 2, int(rng.integers(lo, hi + 1)))))
    return SeqSpec(left_tail=w(1, tail_max), left_core=w(0, core_max),
                   right_core=w(0, core_max), right_tail=w(1, tail_max))


# 1 -------------------------------------------------------------------------

def test_c01_family_certification(cf, acceptance_log):
    t0 = time.perf_counter()
    rep = validate(cf, resolution=1e-4)
    elapsed = time.perf_counter() - t0
    required = ("F0.i", "F0.ii", "F1.i", "F1.ii", "F01b", "F01c", "standing")
    positive = all(rep[n].passed and rep[n].margin > 0 for n in required)
    # (F01)(a) is the identity f1(1) = 0, checked exactly
    exact = rep["F01a"].passed and cf.f1(1.0) == 0.0
    broken_c1 = validate(pair_from_dict(dict(CANONICAL, c1=1.0))).failures
    broken_std = validate(pair_from_dict(
        {"beta": 2.0, "lambda": 0.5, "c1": 0.38, "shape_controls": {"plateau": 1.5}})).failures
    ok = (rep.all_pass and positive and exact and broken_c1 == ["F1.i"]
          and "standing" in broken_std and elapsed < 1.0)
    margins = ", ".join(f"{n}={rep[n].margin:.3g}" for n in required)
    acceptance_log(1, ok, f"CF passes ({margins}); c1=1 fails {broken_c1}; "
                          f"beta=2 fails {broken_std}; validate {elapsed:.2f} s")
    assert ok


# 2 -------------------------------------------------------------------------

def test_c02_expanding_machinery(cf, acceptance_log):
    rng = np.random.default_rng(12)
    B, D = band(cf), fundamental(cf)
    kappa = cf.params.alpha_bar * cf.params.alpha
    bad, worst_ratio, longest = [], math.inf, 0
    for i in range(100):
        a, b = np.sort(rng.uniform(B.lo, B.hi, 2))
        J = Interval(a, b)
        ch = successor_chain(cf, J)
        for s in ch.steps:
            worst_ratio = min(worst_ratio, s.min_deriv / kappa)
        longest = max(longest, ch.i_J)
        if not (ch.final.contains(D) and ch.i_J <= chain_length_bound(cf, J)
                and all(s.min_deriv >= kappa for s in ch.steps)):
            bad.append(i)
    ok = not bad
    acceptance_log(2, ok, f"100 chains, failures {bad}; min step derivative / kappa = "
                          f"{worst_ratio:.3f}; longest chain {longest}")
    assert ok


# 3 -------------------------------------------------------------------------

def test_c03_sweeping(cf, acceptance_log):
    rng = np.random.default_rng(13)
    D = fundamental(cf)
    bad = []
    for i in range(50):
        a, b = np.sort(rng.uniform(0.05, 0.95, 2))
        H = Interval(a, b)
        res = sweep(cf, H)
        if not image(cf, res.word, H).contains(D):
            bad.append(i)
    ok = not bad
    acceptance_log(3, ok, f"50 sweeps, uncovered {bad}")
    assert ok


# 4 -------------------------------------------------------------------------

def test_c04_near_zero_exponents(cf, acceptance_log):
    t0 = time.perf_counter()
    neg = near_zero_negative(cf, 0.05)
    t_neg = time.perf_counter() - t0
    t0 = time.perf_counter()
    pos = near_zero_positive(cf, 0.05)
    t_pos = time.perf_counter() - t0
    xs = np.linspace(0.0, 1.0, 4097)
    contraction = float(np.abs(cf.compose_deriv(neg.word, xs)).max())
    ok = (-0.05 < neg.exponent < 0 and 0 < pos.exponent < 0.05
          and neg.residual <= 1e-10 and pos.residual <= 1e-10 and contraction < 1
          and t_neg < 60 and t_pos < 60)
    acceptance_log(4, ok, f"negative {neg.exponent:.4f} (period {neg.period}, grid max "
                          f"|f'| {contraction:.3g}, {t_neg:.1f} s); positive {pos.exponent:.4f} "
                          f"(period {pos.period}, {t_pos:.1f} s)")
    assert ok


# 5 -------------------------------------------------------------------------

def _oracle_roots(pair, word):
    xs = np.linspace(0.0, 1.0, 100_001)
    g = pair.compose_value(word, xs) - xs
    roots = list(xs[g == 0.0])
    s = np.sign(g)
    fn = lambda x: pair.compose_value(word, float(x)) - float(x)  # noqa: E731
    roots += [brentq(fn, xs[i], xs[i + 1], xtol=1e-15)
              for i in np.nonzero(s[:-1] * s[1:] < 0)[0]]
    return np.sort(np.array(roots))


def test_c05_spectral_gap(cf, acceptance_log):
    g = gap_estimate(cf, 12)
    hist = dict(g.history)
    ns = (4, 6, 8, 10, 12)
    bt = [hist[n] for n in ns]
    margins = [LOG_BETA - math.log(b) for b in bt]
    nondecreasing = all(b2 >= b1 for b1, b2 in zip(bt, bt[1:]))
    # stable: the margin loses less each time and never more than what is left
    drops = [m1 - m2 for m1, m2 in zip(margins, margins[1:])]
    stable = (all(d2 <= d1 for d1, d2 in zip(drops, drops[1:]))
              and all(d < m for d, m in zip(drops, margins[1:])))
    table = enumerate_orbits(cf, 8)
    worst, count_ok = 0.0, True
    for n in range(1, 9):
        t = table[n]
        for code, w in enumerate(all_words(n)):
            mine = np.sort(t.fix[t.codes == code])
            ref = _oracle_roots(cf, w)
            if len(mine) != len(ref):
                count_ok = False
                continue
            if len(ref):
                worst = max(worst, float(np.abs(mine - ref).max()))
    ok = g.margin > 0 and nondecreasing and stable and count_ok and worst <= 1e-8
    acceptance_log(5, ok, f"margin_12 {g.margin:.4f} (lower-bound certificate), margins "
                          f"{[round(m, 4) for m in margins]}, oracle counts match {count_ok}, "
                          f"max location error {worst:.1e}")
    assert ok


# 6 -------------------------------------------------------------------------

def test_c06_spectrum_shape(cf, acceptance_log):
    ents = spectrum_sample(cf, 12)
    ex = np.array([e.exponent for e in ents])
    included = np.array([not e.excluded for e in ents])
    bt = gap_estimate(cf, 12).beta_tilde_n
    has_lam = bool(np.any(np.abs(ex - math.log(CANONICAL["lambda"])) < 1e-12))
    has_beta = bool(np.any(np.abs(ex - LOG_BETA) < 1e-12))
    both = bool((ex[included] < 0).any() and (ex[included] > 0).any())
    below = float(ex[included].max()) <= math.log(bt) + 1e-9
    ok = has_lam and has_beta and both and below
    acceptance_log(6, ok, f"{len(ents)} exponents; log lambda {has_lam}, log beta {has_beta}, "
                          f"both signs {both}, included max {ex[included].max():.4f} <= "
                          f"log beta_tilde_12 {math.log(bt):.4f}")
    assert ok


# 7 -------------------------------------------------------------------------

def test_c07_pressure_and_transition(cf, acceptance_log):
    _cached.cache_clear()           # time the n = 12 enumeration too
    t0 = time.perf_counter()
    n = 12
    curve = pressure_curve(cf, -6.0, 2.0, 400, n)
    convex = float(curve.second_differences().min()) >= -1e-9
    above = all(v >= -t * LOG_BETA - 1e-12 for t, v in zip(curve.t_grid, curve.values) if t <= 0)
    maxfix = enumerate_orbits(cf, n)[n].max_fixed_points_per_word()
    p0 = pressure(cf, 0.0, n)
    entropy_ok = abs(p0 - math.log(2)) <= math.log(maxfix) / n
    k = phase_transition(cf, n, t_lo=-3.0, t_hi=1.0)
    bt = gap_estimate(cf, n).beta_tilde_n
    lo = -math.log(2) / (LOG_BETA - math.log(bt)) - 0.1
    # measured slope of P_n on the repeller side, at twice the transition point
    h = 1e-4
    t_left = 2.0 * k.t_Q
    measured = (pressure(cf, t_left, n) - pressure(cf, t_left - h, n)) / h
    elapsed = time.perf_counter() - t0
    ok = (convex and above and entropy_ok and k.detected
          and abs(k.D_minus + LOG_BETA) <= 5e-3 and abs(measured + LOG_BETA) <= 5e-3
          and k.D_plus >= -math.log(bt) - 1e-2 and lo <= k.t_Q < 0 and elapsed < 120)
    acceptance_log(7, ok, f"convex {convex}, P>=-t log beta {above}, |P(0)-log2| "
                          f"{abs(p0 - math.log(2)):.1e}; t_Q {k.t_Q:.4f} in [{lo:.3f}, 0), "
                          f"D- {k.D_minus:.4f} (measured {measured:.4f}), D+ {k.D_plus:.4f}, "
                          f"jump {k.jump:.4f}; {elapsed:.1f} s")
    assert ok


# 8 -------------------------------------------------------------------------

def test_c08_domains(cf, acceptance_log):
    rng = np.random.default_rng(18)
    nest = zero_inv = equiv = True
    for _ in range(200):
        s = random_seq(rng, core_max=70, tail_max=8)
        apps = approximations(cf, s, 64)
        nest &= all(a.contains(b, tol=0.0) for a, b in zip(apps, apps[1:]))
        w = s.left_word(64)
        zero_inv &= domain_at_depth(cf, Word.zeros(int(rng.integers(1, 20))) + w) == apps[-1]
        equiv &= (domain_at_depth(cf, shift(s).left_word(64))
                  == image(cf, Word((s.bit(0),)), domain_at_depth(cf, s.left_word(63))))
    ones = [classify_fiber(cf, SeqSpec(left_tail=Word((1,)), left_core=Word(tuple(
        rng.integers(0, 2, 10))))).status for _ in range(10)]
    zeros = [classify_fiber(cf, SeqSpec(left_tail=Word((0,)), left_core=Word(tuple(
        rng.integers(0, 2, 10))))).status for _ in range(10)]
    J = Interval(0.3, 0.4)
    fam = nontrivial_family(cf, J, count=10)
    fam_ok = (len({str(s) for s in fam}) == 10
              and all(domain_at_depth(cf, s.left_core).contains(J, tol=0.0) for s in fam))
    ok = (nest and zero_inv and equiv and all(x == TRIVIAL for x in ones)
          and all(x == NONTRIVIAL for x in zeros) and fam_ok)
    acceptance_log(8, ok, f"nesting {nest}, left-zero invariance {zero_inv}, shift "
                          f"equivariance {equiv} on 200 sequences; ones tails "
                          f"{set(ones)}, zeros tails {set(zeros)}; family of 10 {fam_ok}")
    assert ok


# 9 -------------------------------------------------------------------------

def test_c09_skew_product(cf, acceptance_log):
    model = HorseshoeModel().require(cf)
    rng = np.random.default_rng(19)
    conj = True
    for _ in range(100):
        s = random_seq(rng)
        xs, xu = code_point(model, s)
        conj &= itinerary(model, xs, xu, -20, 20) == truncate(s, -20, 20)
    q_orb, p_orb = fixed_points(cf, "0")
    (ph_orb,) = fixed_points(cf, "1")
    fixed = step(model, cf, P_POINT) == P_POINT and step(model, cf, Q_POINT) == Q_POINT
    idx = tuple(lift_periodic(model, cf, o).index for o in (p_orb, q_orb, ph_orb))
    cyc = verify_cycle(model, cf)
    hits = 0
    for lo in np.arange(20) * 0.05:
        orb = periodic_point_near(cf, lo + 0.025, 0.025)
        lifted = lift_periodic(model, cf, orb)
        if lifted.index == 2 and lo <= orb.fix <= lo + 0.05:
            hits += 1
    ok = conj and fixed and idx == (1, 2, 1) and cyc.ok and hits == 20
    acceptance_log(9, ok, f"conjugacy {conj}; P, Q fixed {fixed}; indices P,Q,P-hat {idx}; "
                          f"cycle checks {sum(c.passed for c in cyc.checks)}/3; "
                          f"index-2 net cells {hits}/20")
    assert ok


# 10 ------------------------------------------------------------------------

def test_c10_cli_determinism(tmp_path, acceptance_log):
    cfg = tmp_path / "cf.json"
    cfg.write_text(json.dumps(CANONICAL))
    runs = [["gap", "--nmax", "10"], ["transition", "--n", "10"],
            ["spectrum", "--nmax", "8", "--format", "csv"], ["domain", "--seq", "[011*] 1 ."]]
    same = True
    for argv in runs:
        outs = []
        for threads in (1, 1, 4):
            r = subprocess.run([sys.executable, "-m", "porcupine.cli", *argv, "--family",
                                str(cfg), "--threads", str(threads)],
                               capture_output=True, check=True)
            outs.append(r.stdout)
        same &= outs[0] == outs[1] == outs[2]
    acceptance_log(10, same, f"{len(runs)} commands byte-identical across repeated runs "
                             f"with 1 and 4 threads: {same}")
    assert same


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
