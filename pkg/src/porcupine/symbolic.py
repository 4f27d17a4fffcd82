"""Finite words, eventually periodic bi-infinite sequences and the shift on Sigma_2.

A :class:`SeqSpec` stores a sequence as ``[left tail] left core . right core
[right tail]``.  The left core occupies positions -m..-1, the right core
positions 0..n-1, and each tail repeats a nonempty period word outwards.  For
the left tail the last symbol of the period is the one adjacent to the core,
so ``[01*]`` reads ``...0101`` towards the dot.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union


@dataclass(frozen=True)
class Word:
    bits: tuple[int, ...] = ()

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"word symbols must be 0 or 1, got {self.bits!r}")

    @classmethod
    def parse(cls, text: str) -> "Word":
        text = "".join(text.split())
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"not a binary word: {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def zeros(cls, n: int) -> "Word":
        return cls((0,) * n)

    @classmethod
    def ones(cls, n: int) -> "Word":
        return cls((1,) * n)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.bits[i])
        return self.bits[i]

    def __add__(self, other) -> "Word":
        return Word(self.bits + as_word(other).bits)

    def __radd__(self, other) -> "Word":
        return Word(as_word(other).bits + self.bits)

    def __mul__(self, k: int) -> "Word":
        return Word(self.bits * k)

    @property
    def length(self) -> int:
        return len(self.bits)

    def count_ones(self) -> int:
        return sum(self.bits)

    def rotate(self, k: int = 1) -> "Word":
        if not self.bits:
            return self
        k %= len(self.bits)
        return Word(self.bits[k:] + self.bits[:k])

    def is_primitive(self) -> bool:
        n = len(self.bits)
        return n > 0 and all(self.rotate(d) != self for d in range(1, n) if n % d == 0)


WordLike = Union[Word, str, Iterable[int]]


def as_word(w: WordLike) -> Word:
    if isinstance(w, Word):
        return w
    if isinstance(w, str):
        return Word.parse(w)
    return Word(tuple(int(b) for b in w))


ZEROS = Word((0,))
ONES = Word((1,))


@dataclass(frozen=True)
class SeqSpec:
    left_tail: Word = ZEROS
    left_core: Word = Word()
    right_core: Word = Word()
    right_tail: Word = ZEROS

    def __post_init__(self):
        for name in ("left_tail", "left_core", "right_core", "right_tail"):
            object.__setattr__(self, name, as_word(getattr(self, name)))
        if not self.left_tail.bits or not self.right_tail.bits:
            raise ValueError("periodic tails need a nonempty period word")

    @classmethod
    def periodic(cls, period: WordLike) -> "SeqSpec":
        """The bi-infinite periodic sequence ``period^Z`` with ``xi_0 = period[0]``."""
        w = as_word(period)
        return cls(left_tail=w, right_tail=w)

    @classmethod
    def parse(cls, text: str) -> "SeqSpec":
        return parse_seq(text)

    def bit(self, i: int) -> int:
        lc, rc = self.left_core.bits, self.right_core.bits
        if i >= 0:
            if i < len(rc):
                return rc[i]
            p = self.right_tail.bits
            return p[(i - len(rc)) % len(p)]
        if -i <= len(lc):
            return lc[len(lc) + i]
        k = -i - len(lc) - 1
        p = self.left_tail.bits
        return p[len(p) - 1 - (k % len(p))]

    def left_word(self, m: int) -> Word:
        """Symbols xi_{-m} ... xi_{-1} (leftmost first)."""
        return truncate(self, -m, -1) if m > 0 else Word()

    def right_word(self, n: int) -> Word:
        """Symbols xi_0 ... xi_{n-1}."""
        return truncate(self, 0, n - 1) if n > 0 else Word()

    def __str__(self) -> str:
        def tail(w):
            return f"[{w}*]"
        parts = [tail(self.left_tail)]
        if self.left_core.bits:
            parts.append(str(self.left_core))
        parts.append(".")
        if self.right_core.bits:
            parts.append(str(self.right_core))
        parts.append(tail(self.right_tail))
        return " ".join(parts)


_SEQ_RE = re.compile(
    r"^\s*(?:\[\s*([01]+)\s*\*\s*\])?\s*([01\s]*)\.([01\s]*?)\s*(?:\[\s*([01]+)\s*\*\s*\])?\s*$")


def parse_seq(text: str) -> SeqSpec:
    """Parse ``"[0*] 1 . 0 1 [01*]"``; omitted tails default to all zeros."""
    m = _SEQ_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse sequence {text!r}")
    lt, lc, rc, rt = m.groups()
    return SeqSpec(left_tail=Word.parse(lt) if lt else ZEROS, left_core=Word.parse(lc),
                   right_core=Word.parse(rc), right_tail=Word.parse(rt) if rt else ZEROS)


def truncate(seq: SeqSpec, lo: int, hi: int) -> Word:
    """The symbols of ``seq`` on the window [lo, hi]."""
    if lo > hi:
        raise ValueError("empty window: lo > hi")
    return Word(tuple(seq.bit(i) for i in range(lo, hi + 1)))


def shift(seq: SeqSpec) -> SeqSpec:
    """sigma: (sigma xi)_i = xi_{i+1}."""
    rc, rt = seq.right_core, seq.right_tail
    if rc.bits:
        head, rc = rc.bits[0], rc[1:]
    else:
        head, rt = rt.bits[0], rt.rotate(1)
    return SeqSpec(seq.left_tail, seq.left_core + Word((head,)), rc, rt)


def shift_back(seq: SeqSpec) -> SeqSpec:
    """sigma^-1: (sigma^-1 xi)_i = xi_{i-1}."""
    lc, lt = seq.left_core, seq.left_tail
    if lc.bits:
        last, lc = lc.bits[-1], lc[:-1]
    else:
        last, lt = lt.bits[-1], lt.rotate(-1)
    return SeqSpec(lt, lc, Word((last,)) + seq.right_core, seq.right_tail)


def _side_sum(a: SeqSpec, b: SeqSpec, sign: int, core: int, period: int) -> Fraction:
    # explicit terms up to the point where both sides are purely periodic,
    # then one period of differences summed as a geometric series
    total = Fraction(0)
    start = 0 if sign > 0 else 1
    for k in range(start, core):
        i = sign * k
        if a.bit(i) != b.bit(i):
            total += Fraction(1, 2 ** k)
    block = Fraction(0)
    for j in range(period):
        k = core + j
        i = sign * k
        if a.bit(i) != b.bit(i):
            block += Fraction(1, 2 ** k)
    return total + block / (1 - Fraction(1, 2 ** period))


def metric(a: SeqSpec, b: SeqSpec) -> float:
    """d(a, b) = sum_i 2^-|i| |a_i - b_i|, summed exactly."""
    rcore = max(len(a.right_core), len(b.right_core), 1)
    lcore = max(len(a.left_core), len(b.left_core)) + 1
    rp = math.lcm(len(a.right_tail), len(b.right_tail))
    lp = math.lcm(len(a.left_tail), len(b.left_tail))
    return float(_side_sum(a, b, 1, rcore, rp) + _side_sum(a, b, -1, lcore, lp))


@dataclass(frozen=True)
class Cylinder:
    word: Word
    anchor: int = 0

    def contains(self, seq: SeqSpec) -> bool:
        if not self.word.bits:
            return True
        return truncate(seq, self.anchor, self.anchor + len(self.word) - 1) == self.word


def all_words(n: int) -> Iterator[Word]:
    """All 2^n words of length n in lexicographic order."""
    for k in range(2 ** n):
        yield Word(tuple((k >> (n - 1 - j)) & 1 for j in range(n)))
