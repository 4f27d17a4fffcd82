"""Periodic-orbit pressure P_n(t) of the potential -t log|fiber derivative| and its kink.

    P_n(t) = (1/n) log sum_{|w| = n} sum_{p in Fix f_[w]} |f_[w]'(p)|^(-t)

The sum always contains the repeller term beta^(-tn) from word 0^n at 0.
Splitting it off gives two smooth pieces, L(t) = -t log beta and the
remainder R_n(t); the transition point t_Q is where they cross.  Left of
t_Q the repeller dominates with slope -log beta, right of it the slope is
the Gibbs-averaged exponent of the remaining orbits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .fiber_maps import FiberMapPair, ParameterError
from .spectrum import enumerate_orbits, gap_estimate

ENTROPY_NOTE = "h(F) taken as log 2 (full-shift factor); not computed independently"


def _log_mults(pair: FiberMapPair, n: int, threads=None):
    t = enumerate_orbits(pair, n, threads=threads)[n]
    return t.log_multiplier, t.excluded, t


def pressure(pair: FiberMapPair, t: float, n: int, threads=None) -> float:
    if n < 1:
        raise ParameterError("n must be at least 1")
    logm, _, _ = _log_mults(pair, n, threads)
    return float(logsumexp(-t * logm) / n)


def _pressure_many(logm: np.ndarray, ts: np.ndarray, n: int) -> np.ndarray:
    return logsumexp(-np.outer(ts, logm), axis=1) / n


@dataclass(frozen=True)
class Kink:
    detected: bool
    t_Q: float
    D_minus: float
    D_plus: float
    jump: float
    threshold: float
    lower_bound: float          # -log 2 / (log beta - log beta_tilde_n)
    in_bound: bool

    def to_dict(self) -> dict:
        return {"detected": self.detected, "t_Q": self.t_Q, "D_minus": self.D_minus,
                "D_plus": self.D_plus, "jump": self.jump, "threshold": self.threshold,
                "t_Q_lower_bound": self.lower_bound, "t_Q_in_bound": self.in_bound}


@dataclass(frozen=True)
class PressureCurve:
    n: int
    t_grid: tuple[float, ...]
    values: tuple[float, ...]
    slopes: tuple[float, ...]          # forward differences, one per grid cell
    kink: Kink | None
    beta_tilde_n: float
    meta: dict = field(default_factory=dict)

    def second_differences(self) -> np.ndarray:
        return np.diff(np.asarray(self.values), 2)

    def to_dict(self) -> dict:
        k = self.kink
        return {"n": self.n, "t_grid": list(self.t_grid), "values": list(self.values),
                "slopes": list(self.slopes),
                "kink": None if k is None else {"t_Q": k.t_Q, "D_minus": k.D_minus,
                                                "D_plus": k.D_plus, "jump": k.jump,
                                                "threshold": k.threshold,
                                                "detected": k.detected,
                                                "t_Q_lower_bound": k.lower_bound,
                                                "t_Q_in_bound": k.in_bound},
                "gap": {"beta_tilde_n": self.beta_tilde_n},
                "meta": dict(self.meta)}


def _split(logm: np.ndarray, excluded: np.ndarray):
    rest = logm[~excluded]
    if not excluded.any() or rest.size == 0:
        raise ParameterError("pressure split needs the repeller term and at least one other orbit")
    return float(logm[excluded][0]), rest


def _rest_pressure(rest: np.ndarray, t: float, n: int) -> float:
    return float(logsumexp(-t * rest) / n)


def _rest_slope(rest: np.ndarray, t: float) -> float:
    """d/dt of the remainder: minus the Gibbs-weighted mean of the per-period exponents."""
    a = -t * rest
    w = np.exp(a - a.max())
    return float(-(w * rest).sum() / w.sum())


def phase_transition(pair: FiberMapPair, n: int, t_lo: float = -3.0, t_hi: float = 1.0,
                     theta: float | None = None, tol: float = 1e-4,
                     threads=None) -> Kink:
    """Crossing point t_Q of the repeller branch and the rest, with one-sided slopes."""
    logm, excl, _ = _log_mults(pair, n, threads)
    q_log, rest = _split(logm, excl)
    log_beta = q_log / n
    gap = gap_estimate(pair, n, threads=threads)
    margin = gap.margin
    thr = 0.5 * margin if theta is None else float(theta)

    def diff(t):
        return -t * log_beta - _rest_pressure(rest, t, n)

    a, b = min(t_lo, -1e-9), min(t_hi, 0.0)
    # the difference decreases in t; widen to the left until it is positive
    while diff(a) <= 0:
        a *= 2.0
        if a < -1e6:
            return Kink(False, float("nan"), -log_beta, float("nan"), 0.0, thr,
                        -math.log(2) / margin, False)
    if diff(b) > 0:
        return Kink(False, float("nan"), -log_beta, float("nan"), 0.0, thr,
                    -math.log(2) / margin, False)
    while b - a > tol:
        mid = 0.5 * (a + b)
        if diff(mid) > 0:
            a = mid
        else:
            b = mid
    tq = 0.5 * (a + b)
    d_minus = -log_beta
    d_plus = _rest_slope(rest, tq) / n
    jump = d_plus - d_minus
    bound = -math.log(2) / margin
    return Kink(bool(jump >= thr), float(tq), float(d_minus), float(d_plus), float(jump),
                float(thr), float(bound), bool(bound - 0.1 <= tq < 0))


def pressure_curve(pair: FiberMapPair, t_lo: float, t_hi: float, steps: int, n: int,
                   theta: float | None = None, threads=None) -> PressureCurve:
    if not t_lo < t_hi:
        raise ParameterError("need t_lo < t_hi")
    if steps < 8:
        raise ParameterError("need at least 8 grid steps")
    logm, _, table = _log_mults(pair, n, threads)
    ts = np.linspace(t_lo, t_hi, steps + 1)
    vals = _pressure_many(logm, ts, n)
    slopes = np.diff(vals) / np.diff(ts)
    kink = phase_transition(pair, n, t_lo, t_hi, theta, threads=threads)
    gap = gap_estimate(pair, n, threads=threads)
    meta = {"entropy": ENTROPY_NOTE,
            "max_fixed_points_per_word": table.max_fixed_points_per_word(),
            "orbit_count": int(len(logm))}
    return PressureCurve(n, tuple(float(t) for t in ts), tuple(float(v) for v in vals),
                         tuple(float(s) for s in slopes), kink, gap.beta_tilde_n, meta)


@dataclass(frozen=True)
class SubgradientReport:
    t: float
    n: int
    dominant_word: str
    dominant_fix: float
    dominant_exponent: float
    dominant_weight: float
    chi_mean: float
    checks: tuple[tuple[float, float, bool], ...]   # (s, slack, ok)

    @property
    def ok(self) -> bool:
        return all(c[2] for c in self.checks)

    def to_dict(self) -> dict:
        return {"t": self.t, "n": self.n, "dominant_word": self.dominant_word,
                "dominant_fix": self.dominant_fix, "dominant_exponent": self.dominant_exponent,
                "dominant_weight": self.dominant_weight, "chi_mean": self.chi_mean,
                "checks": [{"s": s, "slack": sl, "ok": ok} for s, sl, ok in self.checks],
                "ok": self.ok}


def subgradient_check(pair: FiberMapPair, t: float, n: int,
                      shifts=(-0.1, -0.01, 0.01, 0.1), threads=None) -> SubgradientReport:
    """P_n(t+s) >= P_n(t) - s chi for the Gibbs mean exponent chi at t.

    The orbit with the largest weight in Z_n(t) is reported as the dominant
    one; the subgradient itself uses the weighted mean over all orbits.
    """
    logm, _, table = _log_mults(pair, n, threads)
    a = -t * logm
    w = np.exp(a - a.max())
    w /= w.sum()
    i = int(np.argmax(w))
    expo = logm / n
    chi = float((w * expo).sum())
    p0 = float(logsumexp(a) / n)
    checks = []
    for s in shifts:
        ps = float(logsumexp(-(t + s) * logm) / n)
        slack = ps - (p0 - s * chi)
        checks.append((float(s), slack, bool(slack >= -1e-12)))
    return SubgradientReport(float(t), n, str(table.word(i)), float(table.fix[i]),
                             float(expo[i]), float(w[i]), chi, tuple(checks))
