"""Periodic orbits, Lyapunov exponents, near-zero exponents, spectral gap and distortion.

Fixed points of ``f_[w]`` are found by a sign-change scan of ``f_[w](x) - x``
on a uniform grid followed by bisection.  For whole word lengths the scan is
run over the prefix tree of words, so each composition is built from its
parent with one more map application.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from .fiber_maps import ConstructionError, FiberMapPair, ParameterError
from .itinerary import Interval, band, image, successor_chain
from .orbit import NEUTRAL_TOL, RESIDUAL_TOL, PeriodicOrbit, solve_fixed_point
from .symbolic import SeqSpec, Word, as_word

SCAN_POINTS = 2048
REFINE_POINTS = 64
REFINE_DEPTH = 6


class NotFoundError(RuntimeError):
    """A search ran out of budget; ``best`` holds the closest candidate seen."""

    def __init__(self, message: str, best: PeriodicOrbit | None = None):
        super().__init__(message)
        self.best = best


def default_threads() -> int:
    env = os.environ.get("PORCUPINE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"PORCUPINE_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


# ------------------------------------------------------------------ scanning

def _brackets(xs: np.ndarray, g: np.ndarray) -> tuple[list[float], list[tuple[float, float]]]:
    """Exact grid roots and strict sign-change cells of ``g`` sampled on ``xs``."""
    exact = xs[g == 0.0].tolist()
    s = np.sign(g)
    cells = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return exact, [(float(xs[i]), float(xs[i + 1])) for i in cells]


def _suspicious(g: np.ndarray) -> np.ndarray:
    """Interior nodes where g turns back towards 0 without changing sign."""
    if len(g) < 3:
        return np.empty(0, dtype=int)
    left = g[1:-1] - g[:-2]
    right = g[2:] - g[1:-1]
    same = (np.sign(g[:-2]) == np.sign(g[1:-1])) & (np.sign(g[1:-1]) == np.sign(g[2:]))
    turn = (left * right < 0) & ((g[1:-1] > 0) == (left < 0))
    small = np.abs(g[1:-1]) <= np.abs(left) + np.abs(right)
    return np.nonzero(same & turn & small & (g[1:-1] != 0))[0] + 1


def _refine(fn, lo: float, hi: float, depth: int):
    """Denser scan of [lo, hi] looking for a root pair hidden inside one cell."""
    xs = np.linspace(lo, hi, REFINE_POINTS + 1)
    g = fn(xs) - xs
    exact, cells = _brackets(xs, g)
    exact = [x for x in exact if lo < x < hi]
    if cells or exact or depth <= 0 or hi - lo < 1e-12:
        return exact, cells
    out_e, out_c = [], []
    for i in _suspicious(g):
        e, c = _refine(fn, float(xs[i - 1]), float(xs[i + 1]), depth - 1)
        out_e += e
        out_c += c
    return out_e, out_c


def scan_roots(fn, grid: int = SCAN_POINTS, refine: bool = True) -> tuple[list[float], list[tuple[float, float]]]:
    """Grid roots and brackets of ``fn(x) - x`` on [0, 1]."""
    xs = np.linspace(0.0, 1.0, grid + 1)
    g = fn(xs) - xs
    exact, cells = _brackets(xs, g)
    if refine:
        for i in _suspicious(g):
            e, c = _refine(fn, float(xs[i - 1]), float(xs[i + 1]), REFINE_DEPTH)
            exact += e
            cells += c
    return exact, cells


def fixed_points(pair: FiberMapPair, word, grid: int = SCAN_POINTS,
                 refine: bool = True) -> list[PeriodicOrbit]:
    """All fixed points of ``f_[word]`` on [0, 1], sorted by position."""
    w = as_word(word)
    if not w.bits:
        raise ParameterError("fixed_points needs a nonempty word")
    fn = lambda x: pair.compose_value(w, x)  # noqa: E731
    exact, cells = scan_roots(fn, grid, refine)
    pts = [float(x) for x in exact]
    for lo, hi in cells:
        pts.append(solve_fixed_point(pair, w, lo, hi))
    return [PeriodicOrbit.from_fixed_point(pair, w, x) for x in sorted(set(pts))]


# --------------------------------------------------------- batch enumeration

def _apply(pair: FiberMapPair, bits: np.ndarray, x: np.ndarray, d: np.ndarray):
    """One step on arrays: symbol ``bits[i]`` applied to ``x[i]``; d tracks the derivative."""
    v0, v1 = pair.f0(x), pair.f1(x)
    d0, d1 = pair.f0.deriv(x), pair.f1.deriv(x)
    one = bits == 1
    return np.where(one, v1, v0), d * np.where(one, d1, d0)


def _batch_bisect(pair: FiberMapPair, bits: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                  iters: int = 64):
    """Vectorised bisection for many (word, bracket) pairs of one length."""
    n = bits.shape[1]

    def g(x):
        v = x
        d = np.ones_like(x)
        for j in range(n):
            v, d = _apply(pair, bits[:, j], v, d)
        return v - x, d

    glo, _ = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm, _ = g(mid)
        left = np.sign(gm) == np.sign(glo)
        lo = np.where(left, mid, lo)
        glo = np.where(left, gm, glo)
        hi = np.where(left, hi, mid)
    x = 0.5 * (lo + hi)
    # snap to whichever bracket end has the smaller residual
    gx, _ = g(x)
    gl, _ = g(lo)
    gh, _ = g(hi)
    best = np.where(np.abs(gl) < np.abs(gx), lo, x)
    gb = np.minimum(np.abs(gl), np.abs(gx))
    best = np.where(np.abs(gh) < gb, hi, best)
    _, d = g(best)
    vals, _ = g(best)
    return best, d, np.abs(vals)


@dataclass
class LengthTable:
    """Fixed points of all words of one length, as parallel arrays."""

    n: int
    codes: np.ndarray       # word as an integer, first symbol most significant
    fix: np.ndarray
    deriv: np.ndarray       # signed derivative of f_[w] at fix
    residual: np.ndarray

    @property
    def multiplier(self) -> np.ndarray:
        return np.abs(self.deriv)

    @property
    def log_multiplier(self) -> np.ndarray:
        return np.log(np.abs(self.deriv))

    @property
    def exponent(self) -> np.ndarray:
        return self.log_multiplier / self.n

    @property
    def excluded(self) -> np.ndarray:
        """The repeller orbit: word 0^n at the fixed point 0."""
        return (self.codes == 0) & (self.fix == 0.0)

    def word(self, i: int) -> Word:
        c = int(self.codes[i])
        return Word(tuple((c >> (self.n - 1 - j)) & 1 for j in range(self.n)))

    def orbits(self) -> list[PeriodicOrbit]:
        out = []
        for i in range(len(self.fix)):
            mult = float(abs(self.deriv[i]))
            if abs(mult - 1.0) <= NEUTRAL_TOL:
                st = "neutral"
            else:
                st = "repelling" if mult > 1.0 else "attracting"
            out.append(PeriodicOrbit(self.word(i), float(self.fix[i]), mult,
                                     math.log(mult) / self.n, st, float(self.residual[i])))
        return out

    def max_fixed_points_per_word(self) -> int:
        if len(self.codes) == 0:
            return 0
        return int(np.bincount(self.codes.astype(np.int64)).max())


@dataclass
class OrbitTable:
    """Fixed points of every word of length 1..n_max."""

    n_max: int
    grid: int
    lengths: dict[int, LengthTable] = field(default_factory=dict)

    def __getitem__(self, n: int) -> LengthTable:
        return self.lengths[n]


def _subtree(pair: FiberMapPair, prefix: tuple[int, ...], n_max: int, xs: np.ndarray,
             refine: bool):
    """Scan every word extending ``prefix`` (including ``prefix`` itself) up to n_max.

    Returns a list of (length, code, exact_roots, brackets).
    """
    v = xs.copy()
    for b in prefix:
        v = pair.maps[b](v)
    found = []

    def visit(word: tuple[int, ...], vals: np.ndarray):
        n = len(word)
        g = vals - xs
        exact, cells = _brackets(xs, g)
        if refine:
            sus = _suspicious(g)
            if len(sus):
                w = Word(word)
                fn = lambda x: pair.compose_value(w, x)  # noqa: E731
                for i in sus:
                    e, c = _refine(fn, float(xs[i - 1]), float(xs[i + 1]), REFINE_DEPTH)
                    exact += e
                    cells += c
        code = 0
        for b in word:
            code = (code << 1) | b
        found.append((n, code, exact, cells))
        if n < n_max:
            for b in (0, 1):
                visit(word + (b,), pair.maps[b](vals))

    if prefix:
        visit(prefix, v)
    return found


def _prefixes(depth: int) -> list[tuple[int, ...]]:
    return [tuple((k >> (depth - 1 - j)) & 1 for j in range(depth)) for k in range(2 ** depth)]


def _enumerate(pair: FiberMapPair, n_max: int, grid: int, threads: int, refine: bool,
               progress=None) -> OrbitTable:
    xs = np.linspace(0.0, 1.0, grid + 1)
    split = min(n_max, 4)
    found = []
    # words shorter than the split depth are scanned directly
    for n in range(1, split):
        for pre in _prefixes(n):
            found += [r for r in _subtree(pair, pre, n, xs, refine) if r[0] == n]
    tasks = _prefixes(split)
    work = lambda pre: _subtree(pair, pre, n_max, xs, refine)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, tasks))
    else:
        parts = []
        for i, pre in enumerate(tasks):
            parts.append(work(pre))
            if progress:
                progress(i + 1, len(tasks))
    for part in parts:
        found += part
    table = OrbitTable(n_max=n_max, grid=grid)
    for n in range(1, n_max + 1):
        rows = [r for r in found if r[0] == n]
        codes_e, fix_e = [], []
        codes_b, lo_b, hi_b = [], [], []
        for _, code, exact, cells in rows:
            for x in exact:
                codes_e.append(code)
                fix_e.append(float(x))
            for lo, hi in cells:
                codes_b.append(code)
                lo_b.append(lo)
                hi_b.append(hi)
        codes = np.array(codes_e + codes_b, dtype=np.int64)
        fix = np.array(fix_e + [0.0] * len(codes_b))
        deriv = np.zeros(len(codes))
        resid = np.zeros(len(codes))
        k = len(codes_e)
        if k:
            bits = _bits(np.array(codes_e, dtype=np.int64), n)
            vals, d = _eval_batch(pair, bits, np.array(fix_e))
            deriv[:k] = d
            resid[:k] = np.abs(vals - np.array(fix_e))
        if codes_b:
            bits = _bits(np.array(codes_b, dtype=np.int64), n)
            x, d, r = _batch_bisect(pair, bits, np.array(lo_b), np.array(hi_b))
            fix[k:] = x
            deriv[k:] = d
            resid[k:] = r
        order = np.lexsort((fix, codes))
        table.lengths[n] = LengthTable(n, codes[order], fix[order], deriv[order], resid[order])
    return table


def _bits(codes: np.ndarray, n: int) -> np.ndarray:
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(np.int8)


def _eval_batch(pair: FiberMapPair, bits: np.ndarray, x: np.ndarray):
    v = x.copy()
    d = np.ones_like(x)
    for j in range(bits.shape[1]):
        v, d = _apply(pair, bits[:, j], v, d)
    return v, d


@lru_cache(maxsize=8)
def _cached(pair: FiberMapPair, n_max: int, grid: int, refine: bool) -> OrbitTable:
    return _enumerate(pair, n_max, grid, 1, refine)


def enumerate_orbits(pair: FiberMapPair, n_max: int, grid: int = SCAN_POINTS,
                     threads: int | None = None, refine: bool = True,
                     progress=None) -> OrbitTable:
    """Fixed points of every word of length 1..n_max.

    The result does not depend on ``threads``: the word tree is split into
    fixed subtrees and the rows are sorted by (word, position) afterwards.
    """
    if n_max < 1:
        raise ParameterError("n_max must be at least 1")
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 and progress is None:
        return _cached(pair, n_max, grid, refine)
    return _enumerate(pair, n_max, grid, threads, refine, progress)


# ------------------------------------------------------------- exponents

def finite_time_exponent(pair: FiberMapPair, seq, x: float, n: int) -> float:
    """(1/n) log |f_[xi_0 ... xi_{n-1}]'(x)|; a word is repeated periodically."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    if isinstance(seq, SeqSpec):
        w = seq.right_word(n)
    else:
        base = as_word(seq)
        if not base.bits:
            raise ParameterError("empty word")
        w = (base * (n // len(base) + 1))[:n]
    # accumulate logs so long words cannot underflow
    total, pt = 0.0, float(x)
    for b in w:
        fb = pair.maps[b]
        total += math.log(abs(fb.deriv(pt)))
        pt = fb(pt)
    return total / n


# ------------------------------------------------------------ gap & sample

@dataclass(frozen=True)
class GapEstimate:
    n_max: int
    beta_tilde_n: float
    margin: float
    excluded: str
    argmax_word: Word
    argmax_fix: float
    history: tuple[tuple[int, float], ...]   # (n, beta_tilde over lengths <= n)

    def to_dict(self) -> dict:
        return {"n_max": self.n_max, "beta_tilde_n": self.beta_tilde_n, "margin": self.margin,
                "excluded": self.excluded, "argmax_word": str(self.argmax_word),
                "argmax_fix": self.argmax_fix,
                "history": [{"n": n, "beta_tilde_n": b} for n, b in self.history],
                "note": "beta_tilde_n is a lower bound for the supremum over all orbits"}


EXCLUDED_TEXT = "orbits of word 0^n at the fixed point 0 (forward tail at the repeller)"


def gap_estimate(pair: FiberMapPair, n_max: int, grid: int = SCAN_POINTS,
                 threads: int | None = None) -> GapEstimate:
    table = enumerate_orbits(pair, n_max, grid, threads)
    best = -math.inf
    arg = (Word(), float("nan"))
    hist = []
    for n in range(1, n_max + 1):
        t = table[n]
        keep = ~t.excluded
        if keep.any():
            ex = t.exponent[keep]
            i = int(np.argmax(ex))
            if ex[i] > best:
                best = float(ex[i])
                idx = np.nonzero(keep)[0][i]
                arg = (t.word(int(idx)), float(t.fix[idx]))
        hist.append((n, math.exp(best)))
    bt = math.exp(best)
    return GapEstimate(n_max, bt, math.log(pair.beta) - best, EXCLUDED_TEXT, arg[0], arg[1],
                       tuple(hist))


@dataclass(frozen=True)
class SpectrumEntry:
    word: Word
    fix: float
    exponent: float
    multiplier: float
    stability: str
    excluded: bool

    def to_dict(self) -> dict:
        return {"word": str(self.word), "fix": self.fix, "multiplier": self.multiplier,
                "exponent": self.exponent, "stability": self.stability,
                "excluded": self.excluded}


def spectrum_sample(pair: FiberMapPair, n_max: int, grid: int = SCAN_POINTS,
                    threads: int | None = None) -> list[SpectrumEntry]:
    table = enumerate_orbits(pair, n_max, grid, threads)
    out = []
    for n in range(1, n_max + 1):
        t = table[n]
        exc = t.excluded
        for orb, e in zip(t.orbits(), exc):
            out.append(SpectrumEntry(orb.word, orb.fix, orb.exponent, orb.multiplier,
                                     orb.stability, bool(e)))
    return out


# -------------------------------------------------------- distortion

@dataclass(frozen=True)
class DistortionProfile:
    interval: Interval
    m: tuple[int, ...]
    ratio: tuple[float, ...]
    tempered_rate: tuple[float, ...]


def distortion_profile(pair: FiberMapPair, J: Interval, m_max: int,
                       samples: int = 201) -> DistortionProfile:
    """max/min of (f0^m)' over J for m = 0..m_max."""
    if J.lo <= 0.0 or J.hi >= 1.0:
        raise ParameterError("distortion profile needs J inside (0, 1)")
    xs = J.grid(samples)
    logd = np.zeros_like(xs)
    pt = xs.copy()
    ms, ratios, rates = [0], [1.0], [0.0]
    for m in range(1, m_max + 1):
        logd = logd + np.log(pair.f0.deriv(pt))
        pt = pair.f0(pt)
        spread = float(logd.max() - logd.min())
        ms.append(m)
        ratios.append(math.exp(spread))
        rates.append(spread / m)
    return DistortionProfile(J, tuple(ms), tuple(ratios), tuple(rates))


# ------------------------------------------------------- near-zero exponents

def _domain_around(pair: FiberMapPair, y: float) -> Interval:
    """A fundamental domain [u, f0(u)] of f0 with y near its middle."""
    lo = pair.f0.inverse(y)
    u = 0.5 * (lo + y)
    return Interval(u, pair.f0(u))


def _max_abs_deriv(pair: FiberMapPair, word: Word, grid: int) -> float:
    xs = np.linspace(0.0, 1.0, grid + 1)
    return float(np.abs(pair.compose_deriv(word, xs)).max())


def _push_limit(pair: FiberMapPair) -> int:
    """Largest m for which f0^m keeps points below 1 in double precision."""
    return int(math.floor(math.log(1e-13) / math.log(pair.lam)))


def near_zero_negative(pair: FiberMapPair, eps: float, m_max: int = 400,
                       grid: int = 4096) -> PeriodicOrbit:
    """A globally contracting word 1^l 0^m 1 0^j with exponent in (-eps, 0).

    J is a fundamental domain around the attracting point of f1.  For each m
    the return index j is the least j > 0 with f_[0^m 1 0^j](J) meeting J, and
    l is the least count of leading f1's that lands [0, 1] inside J and makes
    the whole composition contract on the grid.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    J = _domain_around(pair, pair.p_hat)
    f0 = pair.f0
    best = None
    top = min(m_max, _push_limit(pair))
    for m in range(1, top + 1):
        loop = image(pair, Word.zeros(m) + Word((1,)), J)
        j = 0
        while not loop.meets(J, tol=0.0) or j == 0:
            loop = Interval(f0(loop.lo), f0(loop.hi))
            j += 1
            if loop.lo > J.hi or j > 20 * m + 1000:
                break
        if not loop.meets(J, tol=0.0):
            continue
        tail = Word.zeros(m) + Word((1,)) + Word.zeros(j)
        ell = 1
        while True:
            head = Word.ones(ell)
            if J.contains(image(pair, head, Interval(0.0, 1.0)), tol=0.0):
                word = head + tail
                if _max_abs_deriv(pair, word, grid) < 1.0:
                    break
            ell += 1
            if ell > 2000:
                raise ConstructionError("f1 never contracts [0,1] into the fundamental domain")
        x = solve_fixed_point(pair, word, 0.0, 1.0)
        if x is None:
            continue
        orb = PeriodicOrbit.from_fixed_point(pair, word, x)
        if best is None or orb.exponent > best.exponent:
            best = orb
        if -eps < orb.exponent < 0 and orb.residual <= RESIDUAL_TOL:
            return orb
    raise NotFoundError(f"no contracting word with exponent in (-{eps}, 0) for m <= {top}",
                        best)


def near_zero_positive(pair: FiberMapPair, eps: float, m_max: int = 400) -> PeriodicOrbit:
    """An expanding periodic point with exponent in (0, eps).

    The loop 0^m 1 0^j sends I0 back to the band; a successor chain expands
    that piece over D and one more f0 carries D onto I0.  The composition maps
    the preimage K of the band piece over I0, so it has an expanding fixed
    point in K.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    p = pair.params
    I0 = Interval(p.a0, p.b0)
    B = band(pair)
    f0 = pair.f0
    best = None
    top = min(m_max, _push_limit(pair))
    for m in range(1, top + 1):
        loop = image(pair, Word.zeros(m) + Word((1,)), I0)
        cands = []
        j = 0
        while loop.lo < B.hi and j <= 20 * m + 1000:
            loop = Interval(f0(loop.lo), f0(loop.hi))
            j += 1
            lo, hi = max(loop.lo, B.lo), min(loop.hi, B.hi)
            if hi > lo:
                cands.append((hi - lo, j, Interval(lo, hi)))
        if not cands:
            continue
        _, j, Jmj = max(cands, key=lambda c: c[0])
        head = Word.zeros(m) + Word((1,)) + Word.zeros(j)
        try:
            chain = successor_chain(pair, Jmj)
        except ConstructionError:
            continue
        word = head + chain.word + Word((0,))
        # preimage of the band piece inside I0
        ends = [pair.compose_inverse(head, y) for y in (Jmj.lo, Jmj.hi)]
        K = Interval(max(min(ends), I0.lo), min(max(ends), I0.hi))
        x = solve_fixed_point(pair, word, K.lo, K.hi)
        if x is None:
            continue
        orb = PeriodicOrbit.from_fixed_point(pair, word, x)
        if orb.multiplier <= 1.0:
            continue
        if best is None or orb.exponent < best.exponent:
            best = orb
        if 0 < orb.exponent < eps and orb.residual <= RESIDUAL_TOL:
            return orb
    raise NotFoundError(f"no expanding word with exponent in (0, {eps}) for m <= {top}", best)


# ------------------------------------------------------------ export

ORBIT_COLUMNS = ("word", "fix", "multiplier", "exponent", "stability", "excluded")


def orbit_rows(entries: Iterable[SpectrumEntry]) -> list[dict]:
    return [e.to_dict() for e in entries]


def orbits_to_csv(entries: Iterable[SpectrumEntry], fmt=lambda v: f"{v:.12g}") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ORBIT_COLUMNS)
    for e in entries:
        w.writerow([str(e.word), fmt(e.fix), fmt(e.multiplier), fmt(e.exponent), e.stability,
                    int(e.excluded)])
    return buf.getvalue()
