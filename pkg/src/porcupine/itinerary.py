"""Expanding itineraries: successors, successor chains, sweeping, expanding fixed points.

All intervals live in [0, 1].  The *band* is ``[f0^-2(b0), b0]`` and the
fundamental domain ``D = [f0^-2(b0), f0^-1(b0)]``.  A successor step applies
``0^n 1 0^m``: push into the contracting region, jump back near 0 with f1,
and push right until the image meets I0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fiber_maps import ConstructionError, FiberMapPair, ParameterError
from .orbit import RESIDUAL_TOL, PeriodicOrbit, solve_fixed_point
from .symbolic import Word, as_word

MEMBER_TOL = 1e-10
MAX_PUSH = 100_000


class PreconditionError(ValueError):
    """An interval violates the hypothesis of a construction."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("interval endpoints must be finite")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        if lo < -MEMBER_TOL or hi > 1.0 + MEMBER_TOL:
            raise ValueError(f"interval [{lo}, {hi}] leaves [0, 1]")
        object.__setattr__(self, "lo", min(max(lo, 0.0), 1.0))
        object.__setattr__(self, "hi", min(max(hi, 0.0), 1.0))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def is_trivial(self) -> bool:
        return self.hi <= self.lo

    def contains(self, other: "Interval", tol: float = MEMBER_TOL) -> bool:
        return self.lo <= other.lo + tol and other.hi <= self.hi + tol

    def contains_point(self, x: float, tol: float = MEMBER_TOL) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def meets(self, other: "Interval", tol: float = MEMBER_TOL) -> bool:
        return self.lo <= other.hi + tol and other.lo <= self.hi + tol

    def grid(self, n: int = 100) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def __str__(self) -> str:
        return f"[{self.lo:.12g}, {self.hi:.12g}]"


UNIT = Interval(0.0, 1.0)


def image(pair: FiberMapPair, word, J: Interval) -> Interval:
    """f_[word](J), transporting endpoints and swapping them for odd #1s."""
    w = as_word(word)
    a = pair.compose_value(w, J.lo)
    b = pair.compose_value(w, J.hi)
    return Interval(min(a, b), max(a, b))


def band(pair: FiberMapPair) -> Interval:
    return Interval(*pair.band)


def fundamental(pair: FiberMapPair) -> Interval:
    return Interval(*pair.fundamental_domain)


@dataclass(frozen=True)
class SuccessorStep:
    source: Interval
    word: Word
    n: int
    m: int
    image: Interval
    min_deriv: float
    max_deriv: float


@dataclass(frozen=True)
class SuccessorChain:
    source: Interval
    steps: tuple[SuccessorStep, ...]
    final: Interval

    @property
    def i_J(self) -> int:
        return len(self.steps)

    @property
    def word(self) -> Word:
        out = Word()
        for s in self.steps:
            out = out + s.word
        return out


def _require_in_band(pair: FiberMapPair, J: Interval) -> None:
    if J.is_trivial():
        raise PreconditionError(f"interval {J} is trivial")
    if not band(pair).contains(J):
        raise PreconditionError(f"interval {J} is not inside the band {band(pair)}")


def _abs_deriv_range(pair: FiberMapPair, word: Word, J: Interval, n: int = 100):
    d = np.abs(pair.compose_deriv(word, J.grid(n)))
    return float(d.min()), float(d.max())


def expanding_step(pair: FiberMapPair, J: Interval, grid: int = 100) -> SuccessorStep:
    """One expanded successor of ``J`` with its itinerary ``0^n 1 0^m``."""
    _require_in_band(pair, J)
    p = pair.params
    f0, f1 = pair.f0, pair.f1
    lo, hi = J.lo, J.hi
    n = 0
    while True:
        lo, hi = f0(lo), f0(hi)
        n += 1
        if lo >= p.a1 - MEMBER_TOL and hi < 1.0:
            break
        if n > MAX_PUSH:
            raise ConstructionError("f0 never pushes the interval into [a1, 1)")
    lo, hi = f1(hi), f1(lo)
    if not (0.0 < lo and hi < p.a0 + MEMBER_TOL):
        raise ConstructionError(f"f1 jump [{lo}, {hi}] is not inside (0, a0)")
    m = 0
    while hi < p.a0 - MEMBER_TOL:
        lo, hi = f0(lo), f0(hi)
        m += 1
        if m > MAX_PUSH:
            raise ConstructionError("f0 never brings the interval back to I0")
    if m < 1:
        raise ConstructionError("m(J) = 0: the fundamental domains are malformed")
    word = Word.zeros(n) + Word((1,)) + Word.zeros(m)
    img = image(pair, word, J)
    dmin, dmax = _abs_deriv_range(pair, word, J, grid)
    return SuccessorStep(J, word, n, m, img, dmin, dmax)


@dataclass(frozen=True)
class StepConstants:
    """Measured bounds over one-step itineraries of band sub-intervals."""

    n_max: int
    m_max: int
    kappa1: float          # least |derivative| of a step word on its interval
    kappa2: float          # largest |derivative|
    intervals: int


def step_constants(pair: FiberMapPair, points: int = 40) -> StepConstants:
    """n(J), m(J) and derivative bounds over all intervals of a band grid."""
    B = band(pair)
    xs = np.linspace(B.lo, B.hi, points)
    n_max = m_max = 0
    k1, k2 = math.inf, 0.0
    count = 0
    for i in range(points):
        for j in range(i + 1, points):
            s = expanding_step(pair, Interval(xs[i], xs[j]))
            n_max, m_max = max(n_max, s.n), max(m_max, s.m)
            k1, k2 = min(k1, s.min_deriv), max(k2, s.max_deriv)
            count += 1
    return StepConstants(n_max, m_max, k1, k2, count)


def chain_length_bound(pair: FiberMapPair, J: Interval) -> int:
    """ceil(log(|band| / |J|) / log kappa) + 1."""
    B = band(pair)
    return int(math.ceil(math.log(B.width / J.width) / math.log(pair.kappa))) + 1


def successor_chain(pair: FiberMapPair, J: Interval, max_steps: int | None = None) -> SuccessorChain:
    """Expanded successors of ``J`` until the image leaves the band."""
    _require_in_band(pair, J)
    B = band(pair)
    limit = max_steps or max(chain_length_bound(pair, J) + 5, 10)
    steps = []
    cur = J
    while True:
        step = expanding_step(pair, cur)
        steps.append(step)
        cur = step.image
        if not B.contains(cur, tol=0.0):
            break
        if len(steps) >= limit:
            raise ConstructionError(f"chain did not leave the band after {limit} steps")
    final = cur
    if not final.contains(fundamental(pair)):
        raise ConstructionError(f"chain final {final} misses the fundamental domain")
    return SuccessorChain(J, tuple(steps), final)


@dataclass(frozen=True)
class SweepResult:
    word: Word
    m: int
    k: int
    prefix_used: bool
    chain: SuccessorChain | None
    final: Interval


def sweep(pair: FiberMapPair, H: Interval) -> SweepResult:
    """A word whose image of ``H`` covers the fundamental domain.

    ``m`` is the least number of f0-pushes after which f1 lands in
    ``(0, f0^-2(b0))``; ``k`` is the least number of further pushes that
    makes the interval either cover D or sit inside the band, from where
    a successor chain finishes the job.  When ``H`` already sits in the
    band the prefix is skipped.
    """
    if H.is_trivial():
        raise PreconditionError("sweep needs a non-trivial interval")
    if H.lo <= 0.0 or H.hi >= 1.0:
        raise PreconditionError("sweep needs H inside the open interval (0, 1)")
    f0, f1 = pair.f0, pair.f1
    B, D = band(pair), fundamental(pair)
    q2 = B.lo
    # least m with f_[0^m 1](H) inside (0, q2)
    m, top = 0, H.lo
    while f1(top) >= q2:
        top = f0(top)
        m += 1
        if m > MAX_PUSH:
            raise ConstructionError("sweep: f0 never pushes H close to 1")
    if H.contains(D, tol=0.0):
        return SweepResult(Word(), m, 0, False, None, H)
    if B.contains(H, tol=0.0):
        prefix, cur, k = Word(), H, 0
    else:
        prefix = Word.zeros(m) + Word((1,))
        cur = image(pair, prefix, H)
        k = 0
        while not (cur.contains(D, tol=0.0) or B.contains(cur, tol=0.0)):
            cur = Interval(f0(cur.lo), f0(cur.hi))
            k += 1
            if k > MAX_PUSH:
                raise ConstructionError("sweep: pushed interval never reaches the band")
        prefix = prefix + Word.zeros(k)
    if cur.contains(D, tol=0.0):
        return SweepResult(prefix, m, k, bool(prefix.bits), None, cur)
    chain = successor_chain(pair, cur)
    word = prefix + chain.word
    final = image(pair, word, H)
    if not final.contains(D):
        raise ConstructionError("sweep: verified image misses the fundamental domain")
    return SweepResult(word, m, k, bool(prefix.bits), chain, final)


def expanding_fixed_point(pair: FiberMapPair, J: Interval) -> PeriodicOrbit:
    """The expanding fixed point of the chain map of ``J`` inside ``J``.

    The chain image always covers D, which need not cover J when J meets
    I0.  In that case one more f0 (sending D onto I0) is appended to the
    word before the fixed point is located.
    """
    chain = successor_chain(pair, J)
    for word in (chain.word, chain.word + Word((0,))):
        x = solve_fixed_point(pair, word, J.lo, J.hi)
        if x is not None:
            orb = PeriodicOrbit.from_fixed_point(pair, word, x)
            if orb.multiplier <= 1.0:
                raise ConstructionError("chain fixed point is not expanding")
            return orb
    raise ConstructionError(f"no fixed point of the chain map inside {J}")


def _return_words(k_max: int, j_max: int):
    """0^k first, then 0^k 1 0^j, shortest first."""
    for k in range(k_max + 1):
        yield Word.zeros(k)
    for total in range(k_max + j_max + 1):
        for k in range(total + 1):
            j = total - k
            if k <= k_max and j <= j_max:
                yield Word.zeros(k) + Word((1,)) + Word.zeros(j)


def periodic_point_near(pair: FiberMapPair, x: float, eps: float,
                        k_max: int = 400, j_max: int = 400) -> PeriodicOrbit:
    """An expanding periodic point within ``eps`` of ``x``.

    A return word r with ``f_r(D)`` meeting the target window is picked
    (f0-pushes, possibly one f1 jump and further pushes); a small window H
    inside that intersection is swept onto D by a word s, so ``f_[s r]``
    maps H over itself and has a fixed point in H.  Expansion is checked
    afterwards and the window shrunk if needed.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    lo = max(x - eps, 0.0)
    hi = min(x + eps, 1.0)
    if not hi > lo:
        raise ParameterError("target window does not meet (0, 1)")
    target = Interval(lo, hi)
    D = fundamental(pair)
    tiny = 1e-9
    for r in _return_words(k_max, j_max):
        R = image(pair, r, D)
        a, b = max(R.lo, target.lo, tiny), min(R.hi, target.hi, 1.0 - tiny)
        if b - a <= 0:
            continue
        centre = 0.5 * (a + b)
        # prefer the point of the overlap closest to x
        centre = min(max(x, a + 0.25 * (b - a)), b - 0.25 * (b - a))
        radius = 0.25 * (b - a)
        for _ in range(30):
            H = Interval(centre - radius, centre + radius)
            s = sweep(pair, H).word
            word = s + r
            fx = solve_fixed_point(pair, word, H.lo, H.hi)
            if fx is not None:
                orb = PeriodicOrbit.from_fixed_point(pair, word, fx)
                if (orb.multiplier > 1.0 and abs(fx - x) <= eps
                        and orb.residual <= RESIDUAL_TOL):
                    return orb
            radius *= 0.5
        # fall through to the next return word
    raise ConstructionError(f"no expanding periodic point found within {eps} of {x}")
