"""The porcupine: an affine horseshoe on the unit square with the fiber IFS on top.

Base coordinates (xs, xu) are kept as exact rationals, so coding a
sequence and iterating it back reproduces the symbols exactly; the fiber
coordinate is a float.

    C0 = {xu <= 1/su},  C1 = {xu >= 1 - 1/su}
    branch 0: (xs, xu) -> (ss xs,              su xu)
    branch 1: (xs, xu) -> (ss xs + 1 - ss,     su (xu - 1 + 1/su))
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .domains import AdmissibleDomain, classify_fiber
from .fiber_maps import FiberMapPair, ParameterError
from .orbit import PeriodicOrbit
from .symbolic import SeqSpec, Word

RECT_TOL = Fraction(1, 10 ** 9)


class EscapeError(RuntimeError):
    """The base point left both Markov rectangles."""


class NeutralOrbitWarning(UserWarning):
    """A lifted orbit has multiplier 1 within tolerance, so its index is undefined."""


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v)


@dataclass(frozen=True)
class HorseshoeModel:
    sigma_s: Fraction = Fraction(1, 3)
    sigma_u: Fraction = Fraction(3)

    def __post_init__(self):
        ss, su = _frac(self.sigma_s), _frac(self.sigma_u)
        object.__setattr__(self, "sigma_s", ss)
        object.__setattr__(self, "sigma_u", su)
        if not 0 < ss < Fraction(1, 2):
            raise ParameterError("sigma_s must lie in (0, 1/2) for disjoint images")
        if not su > 2:
            raise ParameterError("sigma_u must exceed 2 for disjoint rectangles")

    def domination_margins(self, pair: FiberMapPair) -> tuple[float, float]:
        """(su - beta, min(lambda, gamma') - ss); both must be positive."""
        return (float(self.sigma_u) - pair.beta,
                min(pair.lam, pair.params.gamma_prime) - float(self.sigma_s))

    def dominates(self, pair: FiberMapPair) -> bool:
        a, b = self.domination_margins(pair)
        return a > 0 and b > 0

    def require(self, pair: FiberMapPair) -> "HorseshoeModel":
        if not self.dominates(pair):
            a, b = self.domination_margins(pair)
            raise ParameterError(f"base rates do not dominate the fiber (margins {a:.4g}, {b:.4g})")
        return self

    def to_dict(self) -> dict:
        return {"sigma_s": str(self.sigma_s), "sigma_u": str(self.sigma_u)}

    # ---- base dynamics

    def rectangle(self, xs: Fraction, xu: Fraction) -> int:
        su = self.sigma_u
        if not (-RECT_TOL <= xs <= 1 + RECT_TOL):
            raise EscapeError(f"xs = {float(xs)} is outside [0, 1]")
        if -RECT_TOL <= xu <= 1 / su + RECT_TOL:
            return 0
        if 1 - 1 / su - RECT_TOL <= xu <= 1 + RECT_TOL:
            return 1
        raise EscapeError(f"xu = {float(xu)} lies in neither rectangle")

    def base_step(self, xs, xu):
        xs, xu = _frac(xs), _frac(xu)
        b = self.rectangle(xs, xu)
        ss, su = self.sigma_s, self.sigma_u
        if b == 0:
            return b, ss * xs, su * xu
        return b, ss * xs + 1 - ss, su * (xu - 1 + 1 / su)

    def base_step_back(self, xs, xu):
        """Inverse branch; the backward symbol is 1 exactly when xs >= 1 - ss."""
        xs, xu = _frac(xs), _frac(xu)
        ss, su = self.sigma_s, self.sigma_u
        if not (-RECT_TOL <= xu <= 1 + RECT_TOL):
            raise EscapeError(f"xu = {float(xu)} is outside [0, 1]")
        if -RECT_TOL <= xs <= ss + RECT_TOL:
            return 0, xs / ss, xu / su
        if 1 - ss - RECT_TOL <= xs <= 1 + RECT_TOL:
            return 1, (xs - 1 + ss) / ss, xu / su + 1 - 1 / su
        raise EscapeError(f"xs = {float(xs)} has no preimage in the square")


@dataclass(frozen=True)
class Point3:
    xs: Fraction
    xu: Fraction
    x: float

    def __post_init__(self):
        object.__setattr__(self, "xs", _frac(self.xs))
        object.__setattr__(self, "xu", _frac(self.xu))
        object.__setattr__(self, "x", float(self.x))
        if not 0.0 <= self.x <= 1.0:
            raise ParameterError(f"fiber coordinate {self.x} outside [0, 1]")

    def as_floats(self) -> tuple[float, float, float]:
        return (float(self.xs), float(self.xu), self.x)


def step(model: HorseshoeModel, pair: FiberMapPair, p: Point3) -> Point3:
    b, xs, xu = model.base_step(p.xs, p.xu)
    return Point3(xs, xu, pair.maps[b](p.x))


def step_with_rect(model: HorseshoeModel, pair: FiberMapPair, p: Point3) -> tuple[int, Point3]:
    b, xs, xu = model.base_step(p.xs, p.xu)
    return b, Point3(xs, xu, pair.maps[b](p.x))


def _series(word_bits, ratio: Fraction, scale: Fraction, start: int) -> Fraction:
    """sum_k bit_k * scale * ratio^(start + k)."""
    total = Fraction(0)
    r = ratio ** start
    for b in word_bits:
        if b:
            total += scale * r
        r *= ratio
    return total


def code_point(model: HorseshoeModel, seq: SeqSpec) -> tuple[Fraction, Fraction]:
    """The base point with itinerary ``seq`` (exact for eventually periodic sequences).

    xu = sum_{i>=0} xi_i (su-1) su^-(i+1),  xs = sum_{i>=1} xi_-i (1-ss) ss^(i-1).
    """
    ss, su = model.sigma_s, model.sigma_u
    ru, cu = 1 / su, (su - 1) / su
    rc, rt = seq.right_core.bits, seq.right_tail.bits
    xu = _series(rc, ru, cu, 0)
    block = _series(rt, ru, cu, len(rc))
    xu += block / (1 - ru ** len(rt))
    lc = tuple(reversed(seq.left_core.bits))          # xi_-1, xi_-2, ...
    lt = tuple(reversed(seq.left_tail.bits))
    cs = 1 - ss
    xs = _series(lc, ss, cs, 0)
    block = _series(lt, ss, cs, len(lc))
    xs += block / (1 - ss ** len(lt))
    return xs, xu


def itinerary(model: HorseshoeModel, xs, xu, lo: int, hi: int) -> Word:
    """Symbols xi_lo .. xi_hi of the base point (lo <= 0 <= hi, or any window)."""
    if lo > hi:
        raise ParameterError("empty window")
    fwd = []
    a, b = _frac(xs), _frac(xu)
    for _ in range(max(hi + 1, 0)):
        s, a, b = model.base_step(a, b)
        fwd.append(s)
    back = []
    a, b = _frac(xs), _frac(xu)
    for _ in range(max(-lo, 0)):
        s, a, b = model.base_step_back(a, b)
        back.append(s)
    # back holds xi_-1, xi_-2, ...
    bits = []
    for i in range(lo, hi + 1):
        bits.append(fwd[i] if i >= 0 else back[-i - 1])
    return Word(tuple(bits))


@dataclass(frozen=True)
class LiftedOrbit:
    word: Word
    fiber_orbit: PeriodicOrbit
    base_point: tuple[Fraction, Fraction]
    index: int | None
    return_error: float

    def to_dict(self) -> dict:
        return {"word": str(self.word), "xs": float(self.base_point[0]),
                "xu": float(self.base_point[1]), "x": self.fiber_orbit.fix,
                "multiplier": self.fiber_orbit.multiplier, "index": self.index,
                "return_error": self.return_error}


def lift_periodic(model: HorseshoeModel, pair: FiberMapPair, orbit: PeriodicOrbit,
                  tol: float = 1e-9) -> LiftedOrbit:
    """The saddle of F over the periodic fiber point; index 2 iff the fiber expands."""
    w = orbit.word
    xs, xu = code_point(model, SeqSpec.periodic(w))
    p = Point3(xs, xu, orbit.fix)
    q = p
    for _ in range(len(w)):
        q = step(model, pair, q)
    err = max(abs(float(q.xs - p.xs)), abs(float(q.xu - p.xu)), abs(q.x - p.x))
    if err > tol:
        raise RuntimeError(f"lifted orbit does not close up (error {err:.3g})")
    if orbit.stability == "neutral":
        warnings.warn(f"orbit {w} at {orbit.fix} is neutral; index undefined",
                      NeutralOrbitWarning, stacklevel=2)
        index = None
    else:
        index = 2 if orbit.multiplier > 1.0 else 1
    return LiftedOrbit(w, orbit, (xs, xu), index, err)


@dataclass(frozen=True)
class Spine:
    seq: SeqSpec
    xs: Fraction
    xu: Fraction
    domain: AdmissibleDomain

    def to_dict(self) -> dict:
        d = self.domain.deepest
        return {"seq": str(self.seq), "xs": float(self.xs), "xu": float(self.xu),
                "lo": d.lo, "hi": d.hi, "status": self.domain.status}


def spine(model: HorseshoeModel, pair: FiberMapPair, seq: SeqSpec, max_depth: int = 256,
          width_tol: float = 1e-8) -> Spine:
    xs, xu = code_point(model, seq)
    return Spine(seq, xs, xu, classify_fiber(pair, seq, max_depth, width_tol))


@dataclass(frozen=True)
class CycleCheck:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class CycleReport:
    checks: tuple[CycleCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": [c.to_dict() for c in self.checks]}


def verify_cycle(model: HorseshoeModel, pair: FiberMapPair, samples: int = 20,
                 tol: float = 1e-9, max_steps: int = 10_000) -> CycleReport:
    """Finite checks of the cycle between P = (theta, 1) and Q = (theta, 0)."""
    checks = []
    v = pair.f1(1.0)
    checks.append(CycleCheck("f1(1)=0", v == 0.0, f"f1(1) = {v!r}"))

    xs_grid = [(i + 0.5) / samples for i in range(samples)]
    worst_fwd, worst_back, steps_max = 0.0, 0.0, 0
    monotone = True
    for i, x in enumerate(xs_grid):
        # forward along the stable leaf {xu = 0} of theta: the fiber tends to 1
        p = Point3(Fraction(i, samples), 0, x)
        prev = x
        n = 0
        while 1.0 - p.x > tol and n < max_steps:
            b, p = step_with_rect(model, pair, p)
            if b != 0 or p.x < prev:
                monotone = False
            prev = p.x
            n += 1
        worst_fwd = max(worst_fwd, 1.0 - p.x)
        # backward along the unstable leaf {xs = 0}: f0^-n(x) tends to 0
        y, m = x, 0
        while y > tol and m < max_steps:
            y = pair.f0.inverse(y)
            m += 1
        worst_back = max(worst_back, y)
        steps_max = max(steps_max, n, m)
    ok2 = worst_fwd <= tol and worst_back <= tol and monotone
    checks.append(CycleCheck(
        "W^s(P) and W^u(Q) fiber inclusions", ok2,
        f"max |x_n - 1| = {worst_fwd:.3g}, max f0^-n(x) = {worst_back:.3g}, "
        f"steps <= {steps_max}, monotone = {monotone}"))

    su = model.sigma_u
    lo_u = 1 - 1 / su
    worst = 0.0
    hits_zero = False
    for k in range(samples + 1):
        xu = lo_u + (1 - lo_u) * Fraction(k, samples)
        b, q = step_with_rect(model, pair, Point3(0, xu, 1.0))
        worst = max(worst, abs(q.x))
        if b != 1:
            worst = math.inf
        if k == 0 and q.xu == 0:
            hits_zero = True
    ok3 = worst == 0.0 and hits_zero
    checks.append(CycleCheck(
        "W^u(P) meets W^s(Q)", ok3,
        f"max image fiber coordinate = {worst!r}; image of xu = 1 - 1/su has xu = 0: {hits_zero}"))
    return CycleReport(tuple(checks))


def trajectory(model: HorseshoeModel, pair: FiberMapPair, p: Point3,
               steps: int) -> Iterator[dict]:
    """One record per step; an escape ends the trajectory with an escape record."""
    cur = p
    for t in range(steps + 1):
        try:
            rect = model.rectangle(cur.xs, cur.xu)
        except EscapeError as exc:
            xs, xu, x = cur.as_floats()
            yield {"t": t, "xs": xs, "xu": xu, "x": x, "rectangle": None,
                   "event": "escape", "detail": str(exc)}
            return
        xs, xu, x = cur.as_floats()
        yield {"t": t, "xs": xs, "xu": xu, "x": x, "rectangle": rect}
        if t < steps:
            cur = step(model, pair, cur)


P_POINT = Point3(0, 0, 1.0)
Q_POINT = Point3(0, 0, 0.0)
