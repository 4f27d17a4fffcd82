"""Periodic orbits of the fiber IFS: a word together with a fixed point of f_[word]."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .fiber_maps import FiberMapPair
from .symbolic import Word, as_word

NEUTRAL_TOL = 1e-8
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class PeriodicOrbit:
    word: Word
    fix: float
    multiplier: float
    exponent: float
    stability: str
    residual: float = 0.0

    @classmethod
    def from_fixed_point(cls, pair: FiberMapPair, word, x: float) -> "PeriodicOrbit":
        w = as_word(word)
        if not w.bits:
            raise ValueError("a periodic orbit needs a nonempty word")
        val, d = pair.compose_both(w, float(x))
        mult = abs(float(d))
        if abs(mult - 1.0) <= NEUTRAL_TOL:
            stability = "neutral"
        elif mult > 1.0:
            stability = "repelling"
        else:
            stability = "attracting"
        expo = math.log(mult) / len(w) if mult > 0 else -math.inf
        return cls(w, float(x), mult, expo, stability, abs(float(val) - float(x)))

    @property
    def period(self) -> int:
        return len(self.word)

    @property
    def is_expanding(self) -> bool:
        return self.stability == "repelling"

    def to_dict(self) -> dict:
        return {"word": str(self.word), "fix": self.fix, "multiplier": self.multiplier,
                "exponent": self.exponent, "stability": self.stability}


def solve_fixed_point(pair: FiberMapPair, word, lo: float, hi: float,
                      max_iter: int = 200) -> float | None:
    """Root of f_[word](x) - x on [lo, hi] by bisection down to adjacent floats.

    Returns None when the endpoint values do not bracket a root.
    """
    w = as_word(word)

    def g(x):
        return pair.compose_value(w, x) - x

    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return float(lo)
    if ghi == 0.0:
        return float(hi)
    if glo * ghi > 0:
        return None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0.0:
            return float(mid)
        if (gm > 0) == (ghi > 0):
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
    return float(lo if abs(glo) <= abs(ghi) else hi)
