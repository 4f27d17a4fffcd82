"""Admissible domains I_[xi] of bi-infinite sequences and fiber classification.

For a left word ``xi_-m ... xi_-1`` the domain at depth m is the image of
[0, 1] under the composition with ``xi_-m`` acting first.  The domain of the
whole sequence is the nested intersection over m.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fiber_maps import FiberMapPair, ParameterError
from .itinerary import Interval, PreconditionError, image
from .spectrum import fixed_points
from .symbolic import SeqSpec, Word, as_word

TRIVIAL = "Trivial"
NONTRIVIAL = "NonTrivial"
UNDETERMINED = "Undetermined"

CONVERGE_TOL = 1e-10


def domain_at_depth(pair: FiberMapPair, left_word) -> Interval:
    """f_[left_word]([0, 1]) with the leftmost symbol acting first."""
    return image(pair, as_word(left_word), Interval(0.0, 1.0))


def _all_depths(pair: FiberMapPair, seq: SeqSpec, max_depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints of the domains at depths 1..max_depth in one sweep.

    Entry m-1 starts as [0, 1] when symbol xi_-m is reached and is then
    carried through xi_-m, ..., xi_-1.
    """
    lo = np.zeros(max_depth)
    hi = np.ones(max_depth)
    for k in range(max_depth, 0, -1):
        b = seq.bit(-k)
        f = pair.maps[b]
        a, c = f(lo[k - 1:]), f(hi[k - 1:])
        if b == 1:
            a, c = c, a
        lo[k - 1:], hi[k - 1:] = a, c
    return lo, hi


def approximations(pair: FiberMapPair, seq: SeqSpec, max_depth: int) -> list[Interval]:
    lo, hi = _all_depths(pair, seq, max_depth)
    return [Interval(a, b) for a, b in zip(lo, hi)]


def contraction_bound(pair: FiberMapPair, seq: SeqSpec, m: int) -> float:
    """gamma^k beta^(m-k) with k the number of ones among xi_-m..xi_-1."""
    k = seq.left_word(m).count_ones()
    return pair.params.gamma ** k * pair.beta ** (m - k)


@dataclass(frozen=True)
class AdmissibleDomain:
    seq: SeqSpec
    approximations: tuple[Interval, ...]
    upper_bound_width: float          # gamma^k beta^(m-k) at the deepest depth
    width_bound: float                # min of the above and the deepest width
    status: str
    reason: str = ""
    inner: Interval | None = None     # certified sub-interval when NonTrivial
    witnesses: tuple[float, ...] = field(default_factory=tuple)

    @property
    def deepest(self) -> Interval:
        return self.approximations[-1]

    @property
    def depth(self) -> int:
        return len(self.approximations)

    def to_dict(self) -> dict:
        d = self.deepest
        return {"seq": str(self.seq), "depth": self.depth, "lo": d.lo, "hi": d.hi,
                "bound": self.width_bound, "contraction_bound": self.upper_bound_width,
                "status": self.status, "reason": self.reason,
                "inner": None if self.inner is None else [self.inner.lo, self.inner.hi]}


def _is_zero_word(w: Word) -> bool:
    return not any(w.bits)


def _limit_of_square(pair: FiberMapPair, word: Word, x: float, max_iter: int = 100_000) -> float:
    """Forward limit of x under f_[word]^2 (monotone, so it converges)."""
    w2 = word + word
    for _ in range(max_iter):
        y = pair.compose_value(w2, x)
        if abs(y - x) <= CONVERGE_TOL:
            return y
        x = y
    return x


def _repelling_witness(pair: FiberMapPair, period: Word):
    """A repelling fixed point q of f_[period] and the two f^2 limits around it."""
    for orb in fixed_points(pair, period):
        if orb.stability != "repelling":
            continue
        q = orb.fix
        delta = 1e-7
        left = _limit_of_square(pair, period, max(q - delta, 0.0))
        right = _limit_of_square(pair, period, min(q + delta, 1.0))
        if left < q - CONVERGE_TOL and right > q + CONVERGE_TOL:
            return orb, left, right
    return None


def classify_fiber(pair: FiberMapPair, seq: SeqSpec, max_depth: int = 256,
                   width_tol: float = 1e-8) -> AdmissibleDomain:
    """Trivial / NonTrivial / Undetermined for the domain of ``seq``.

    NonTrivial routes are constructive and tried first: an all-zeros left
    tail (the domain equals the finite-depth one), or a periodic left tail
    whose map has a repelling fixed point, in which case two distinct limit
    points of the squared map are exhibited.  Trivial means an upper bound
    on the width (the contraction bound or the deepest computed width,
    whichever is smaller) dropped below ``width_tol``.
    """
    if max_depth < 1:
        raise ParameterError("max_depth must be at least 1")
    apps = approximations(pair, seq, max_depth)
    k = seq.left_word(max_depth).count_ones()
    bound = pair.params.gamma ** k * pair.beta ** (max_depth - k)
    wb = min(bound, apps[-1].width)

    def result(status, reason, inner=None, wit=()):
        return AdmissibleDomain(seq, tuple(apps), bound, wb, status, reason, inner, tuple(wit))

    if _is_zero_word(seq.left_tail):
        exact = domain_at_depth(pair, seq.left_core)
        return result(NONTRIVIAL, "left tail all zeros: the domain is the core domain", exact,
                      (exact.lo, exact.hi))
    found = _repelling_witness(pair, seq.left_tail)
    if found is not None:
        orb, left, right = found
        a, b = (pair.compose_value(seq.left_core, v) for v in (left, right))
        inner = Interval(min(a, b), max(a, b))
        return result(NONTRIVIAL,
                      f"left tail map has a repelling fixed point at {orb.fix:.12g}",
                      inner, (left, orb.fix, right))
    for m, J in enumerate(apps, start=1):
        km = seq.left_word(m).count_ones()
        if min(pair.params.gamma ** km * pair.beta ** (m - km), J.width) < width_tol:
            return result(TRIVIAL, f"width bound below {width_tol:g} at depth {m}")
    return result(UNDETERMINED, "no certificate within the depth budget")


def classify_many(pair: FiberMapPair, seqs, max_depth: int = 256, width_tol: float = 1e-8,
                  threads: int = 1) -> list[AdmissibleDomain]:
    work = lambda s: classify_fiber(pair, s, max_depth, width_tol)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(work, seqs))
    return [work(s) for s in seqs]


def width_profile(pair: FiberMapPair, seq: SeqSpec, depths) -> list[float]:
    depths = list(depths)
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise ParameterError("depths must increase")
    if not depths:
        return []
    lo, hi = _all_depths(pair, seq, max(depths))
    return [float(hi[d - 1] - lo[d - 1]) for d in depths]


def _push_below(pair: FiberMapPair, J: Interval, cap: float) -> int:
    """Least k >= 1 with f0^-k(J) inside (0, cap)."""
    k, hi = 1, pair.f0.inverse(J.hi)
    while hi >= cap:
        hi = pair.f0.inverse(hi)
        k += 1
        if k > 100_000:
            raise PreconditionError("f0 preimages never enter (0, c1)")
    return k


def _right_part(xi_plus) -> tuple[Word, Word]:
    if xi_plus is None:
        return Word(), Word((0,))
    if isinstance(xi_plus, SeqSpec):
        return xi_plus.right_core, xi_plus.right_tail
    return as_word(xi_plus), Word((0,))


def nontrivial_family(pair: FiberMapPair, J: Interval, xi_plus=None, count: int = 10,
                      levels: int = 3) -> list[SeqSpec]:
    """Distinct sequences ``...1 0^K_L ... 1 0^K_1 . xi+`` whose domain contains J.

    The K's increase strictly along each sequence; sequence i starts from the
    least admissible K_1 plus i, which keeps the K-vectors distinct.  The left
    tail beyond the last block is all zeros, so the domain equals the
    finite-depth one and the containment check is exact.
    """
    if count < 1:
        raise ParameterError("count must be at least 1")
    if J.is_trivial() or J.lo <= 0.0 or J.hi >= 1.0:
        raise PreconditionError("J must be a non-trivial closed interval inside (0, 1)")
    rc, rt = _right_part(xi_plus)
    c1 = pair.c1
    out = []
    base = _push_below(pair, J, c1)
    for i in range(count):
        Ks = []
        cur = J
        for lvl in range(levels):
            need = _push_below(pair, cur, c1)
            K = base + i if lvl == 0 else max(need, Ks[-1] + 1)
            K = max(K, need)
            Ks.append(K)
            pre = pair.compose_inverse(Word.zeros(K), cur.lo), pair.compose_inverse(Word.zeros(K), cur.hi)
            a, b = pair.f1.inverse(pre[1]), pair.f1.inverse(pre[0])
            cur = Interval(a, b)
        left = Word()
        for K in Ks:
            left = Word((1,)) + Word.zeros(K) + left
        seq = SeqSpec(left_tail=Word((0,)), left_core=left, right_core=rc, right_tail=rt)
        dom = domain_at_depth(pair, left)
        if not dom.contains(J, tol=0.0):
            raise PreconditionError(f"containment failed for K = {Ks}")
        out.append(seq)
    return out


CSV_COLUMNS = ("sequence", "depth", "lo", "hi", "bound", "status")


def domains_to_csv(rows, fmt=lambda v: f"{v:.12g}") -> str:
    """One line per (domain, depth) pair."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for d in rows:
        w.writerow([str(d.seq), d.depth, fmt(d.deepest.lo), fmt(d.deepest.hi),
                    fmt(d.width_bound), d.status])
    return buf.getvalue()
